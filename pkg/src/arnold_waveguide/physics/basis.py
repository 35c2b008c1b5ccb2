"""
Unperturbed channel states, resonance indexing and resonance location.

A flat-channel state |n, m⟩ has longitudinal harmonic n and transverse mode m ≥ 1.
Near the coupling resonance (n₀, m₀) states are re-indexed by r = n - n₀ and
p = r + (m - m₀), so that m = m₀ + p - r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from arnold_waveguide.errors import DomainError, ResonanceNotFoundError
from arnold_waveguide.init import logger


RESONANCE_WINDOW = 0.01


def unperturbed_energy(n: int, m: int, k: float, d: float) -> float:
    """
    Energy of the flat-channel state |n, m⟩ at Bloch number k.

    Args:
        n: Longitudinal harmonic
        m: Transverse mode, m ≥ 1
        k: Bloch number
        d: Channel width

    Returns:
        ½((n+k)² + π²m²/d²)

    Raises:
        DomainError: If m < 1
    """
    if m < 1:
        raise DomainError(f"Transverse mode m={m} is outside the domain m >= 1")
    return 0.5 * ((n + k) ** 2 + math.pi**2 * m**2 / d**2)


def longitudinal_frequency(n0: int, k: float, direction: int = 1) -> float:
    """ω_{n₀}: k + n₀ + ½ on the forward branch, -(n₀+k) + ½ on the counter-propagating one."""
    return direction * (n0 + k) + 0.5


def transverse_frequency(m0: int, d: float) -> float:
    """ω_{m₀} = E_{m₀+1} - E_{m₀} = π²(2m₀+1)/(2d²)."""
    return math.pi**2 * (2 * m0 + 1) / (2 * d**2)


@dataclass(frozen=True)
class BasisIndex:
    """Flat-channel state label (n, m)."""

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.m < 1:
            raise DomainError(f"Transverse mode m={self.m} is outside the domain m >= 1")

    def to_resonance(self, n0: int, m0: int) -> ResonanceIndex:
        r = self.n - n0
        return ResonanceIndex(r=r, p=r + self.m - m0)


@dataclass(frozen=True)
class ResonanceIndex:
    """Resonance label (r, p) relative to (n₀, m₀)."""

    r: int
    p: int

    def to_basis(self, n0: int, m0: int) -> BasisIndex:
        """
        Raises:
            DomainError: If the reconstructed m = m₀ + p - r is below 1
        """
        return BasisIndex(n=n0 + self.r, m=m0 + self.p - self.r)


@dataclass(frozen=True)
class Truncation:
    """
    Retained resonance indices r ∈ [-r_max, r_max], p ∈ [p_min, p_max].

    States are ordered row-major with r as the slow index:
    index = (r + r_max)·N_p + (p - p_min).
    """

    r_max: int
    p_min: int
    p_max: int

    def __post_init__(self) -> None:
        if self.r_max < 1:
            raise DomainError(f"r_max={self.r_max} must be at least 1")
        if self.p_max < self.p_min:
            raise DomainError(f"Empty p range [{self.p_min}, {self.p_max}]")

    @classmethod
    def symmetric(cls, r_max: int, p_window: int) -> Truncation:
        return cls(r_max=r_max, p_min=-p_window, p_max=p_window)

    @property
    def n_r(self) -> int:
        return 2 * self.r_max + 1

    @property
    def n_p(self) -> int:
        return self.p_max - self.p_min + 1

    @property
    def dimension(self) -> int:
        return self.n_r * self.n_p

    def doubled_p(self) -> Truncation:
        """Same r range with the p window doubled on both sides."""
        return Truncation(r_max=self.r_max, p_min=2 * self.p_min, p_max=2 * self.p_max)

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """(r, p) value arrays in storage order."""
        r = np.repeat(np.arange(-self.r_max, self.r_max + 1), self.n_p)
        p = np.tile(np.arange(self.p_min, self.p_max + 1), self.n_r)
        return r, p

    def index_of(self, r: int, p: int) -> int:
        if not (-self.r_max <= r <= self.r_max and self.p_min <= p <= self.p_max):
            raise KeyError(f"(r={r}, p={p}) is outside the truncation {self}")
        return (r + self.r_max) * self.n_p + (p - self.p_min)

    def check_modes(self, m0: int) -> None:
        """
        Raises:
            DomainError: If some retained (r, p) reconstructs to m < 1
        """
        lowest = m0 + self.p_min - self.r_max
        if lowest < 1:
            raise DomainError(f"Truncation {self} reaches m = m0 + p_min - r_max = {lowest} < 1 for m0={m0}; shrink r_max or p_min")


def locate_resonance(omega_target: float, d: float, k: float, direction: int = 1, window: float = RESONANCE_WINDOW) -> tuple[int, int, float]:
    """
    Find the coupling resonance ω_{n₀} ≈ ω_{m₀} closest to a target frequency.

    Candidates are integer pairs whose frequencies both lie within `window` (relative)
    of the target. The pair with the smallest |ω_{n₀} - ω_{m₀}| wins; ties go to the pair
    whose longitudinal momentum |n₀ + k| is closest to the target, then to the smaller |n₀|.

    Args:
        omega_target: Target frequency, > 0
        d: Channel width
        k: Bloch number
        direction: +1 for n₀ ≥ 0, -1 for the counter-propagating branch n₀ < 0
        window: Relative search window

    Returns:
        (n0, m0, detuning) with detuning = ω_{n₀} - ω_{m₀}

    Raises:
        ResonanceNotFoundError: If no candidate pair lies within the window
        ValueError: If omega_target is not positive or direction is not ±1
    """
    if omega_target <= 0:
        raise ValueError(f"omega_target must be positive, got {omega_target}")
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")

    lo, hi = omega_target * (1 - window), omega_target * (1 + window)

    # ω_n = direction·(n + k) + ½  =>  n = direction·(ω - ½) - k
    n_bounds = sorted((direction * (lo - 0.5) - k, direction * (hi - 0.5) - k))
    n_candidates = [n for n in range(math.ceil(n_bounds[0]), math.floor(n_bounds[1]) + 1) if lo <= longitudinal_frequency(n, k, direction) <= hi]
    if direction == -1:
        n_candidates = [n for n in n_candidates if n < 0]

    # ω_m = π²(2m+1)/(2d²)  =>  m = d²ω/π² - ½
    m_lo = max(0, math.ceil(d**2 * lo / math.pi**2 - 0.5))
    m_hi = math.floor(d**2 * hi / math.pi**2 - 0.5)
    m_candidates = [m for m in range(m_lo, m_hi + 1) if lo <= transverse_frequency(m, d) <= hi]

    if not n_candidates or not m_candidates:
        raise ResonanceNotFoundError(f"No coupling resonance within {window:.0%} of omega={omega_target} for d={d}, k={k} (longitudinal candidates: {len(n_candidates)}, transverse candidates: {len(m_candidates)})")

    best: tuple[tuple[float, float, int], int, int, float] | None = None
    for n in n_candidates:
        omega_n = longitudinal_frequency(n, k, direction)
        for m in m_candidates:
            detuning = omega_n - transverse_frequency(m, d)
            key = (round(abs(detuning), 12), round(abs(abs(n + k) - omega_target), 12), abs(n))
            if best is None or key < best[0]:
                best = (key, n, m, detuning)

    assert best is not None
    _, n0, m0, detuning = best
    logger.debug("Resonance for omega=%s: n0=%d, m0=%d, detuning=%.6g", omega_target, n0, m0, detuning)
    return n0, m0, detuning
