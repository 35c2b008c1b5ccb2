"""
Stationary spectrum of the resonance block: diagonalization, Mathieu-like groups (q, s),
separatrix classification and projection of states onto the group basis.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import linalg

from arnold_waveguide.config import get_config, get_tolerance
from arnold_waveguide.errors import ClassificationError, ContractViolationError, GroupingError
from arnold_waveguide.init import logger
from arnold_waveguide.models import ConvergenceSummary, LevelClass, ModelParams, SeparatrixScanPoint
from arnold_waveguide.physics.basis import Truncation
from arnold_waveguide.physics.resonance_block import ResonanceBlock, build_resonance_block, hermiticity_norm


MIN_CLASSIFIABLE_LEVELS = 8
CONVERGENCE_THRESHOLD = 1e-6


@dataclass(frozen=True)
class Level:
    """One eigenpair inside a group. `column` points into SpectrumGroups.eigenvectors."""

    s: int
    energy: float
    column: int
    level_class: LevelClass | None = None


@dataclass(frozen=True)
class Group:
    """Levels of one Mathieu-like group, sorted by energy."""

    q: int
    levels: tuple[Level, ...]

    @property
    def energies(self) -> np.ndarray:
        return np.array([level.energy for level in self.levels])

    @property
    def spacings(self) -> np.ndarray:
        return np.diff(self.energies)

    @property
    def reference_energy(self) -> float:
        """Energy of the lowest level."""
        return self.levels[0].energy

    def level(self, s: int) -> Level:
        return self.levels[s]


@dataclass(frozen=True)
class SeparatrixInfo:
    """Separatrix location and chaotic-layer size of a classified group."""

    q: int
    s_sep: int
    M_s: int
    band: tuple[int, int]
    inside_spacing: float
    pair_fraction: float
    spacing_profile: tuple[float, ...]
    bottom_spread: float


@dataclass(frozen=True)
class SpectrumGroups:
    """
    Eigenbasis of the resonance block organized into (q, s) groups.

    `q_labels[j]` and `s_labels[j]` give the group and level index of eigenvector column j.
    """

    groups: tuple[Group, ...]
    omega_n0: float
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    q_labels: np.ndarray = field(repr=False)
    s_labels: np.ndarray = field(repr=False)

    @property
    def qs(self) -> list[int]:
        return [g.q for g in self.groups]

    def group(self, q: int) -> Group:
        for g in self.groups:
            if g.q == q:
                return g
        raise KeyError(f"No group q={q}; available: {self.qs}")

    def column(self, q: int, s: int) -> int:
        return self.group(q).level(s).column

    def eigenvector(self, q: int, s: int) -> np.ndarray:
        return self.eigenvectors[:, self.column(q, s)]

    def central_qs(self) -> list[int]:
        """Groups with |q| at most half the largest |q|; edge groups suffer truncation distortion."""
        if not self.groups:
            return []
        half = max(abs(q) for q in self.qs) // 2
        return [q for q in self.qs if abs(q) <= half]

    def group_spacing_mean(self, qs: list[int] | None = None) -> float:
        """Mean difference of reference energies between adjacent groups."""
        selected = sorted(qs if qs is not None else self.qs)
        refs = [self.group(q).reference_energy for q in selected]
        if len(refs) < 2:
            return float("nan")
        return float((refs[-1] - refs[0]) / (selected[-1] - selected[0]))

    def with_group(self, group: Group) -> SpectrumGroups:
        """Copy with one group replaced, e.g. after classification."""
        return dataclasses.replace(self, groups=tuple(group if g.q == group.q else g for g in self.groups))


def diagonalize_block(block: ResonanceBlock | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Full spectrum of a Hermitian matrix.

    Args:
        block: ResonanceBlock or a square Hermitian array

    Returns:
        (eigenvalues ascending, orthonormal eigenvectors as columns)

    Raises:
        ContractViolationError: If the input is not square or not Hermitian
    """
    matrix = block.matrix if isinstance(block, ResonanceBlock) else np.asarray(block)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ContractViolationError(f"Expected a square matrix, got shape {matrix.shape}")
    defect = hermiticity_norm(matrix)
    if defect > get_tolerance("hermiticity"):
        raise ContractViolationError(f"Matrix is not Hermitian: max |H - H†| = {defect:.3g}")
    eigenvalues, eigenvectors = linalg.eigh(matrix)
    logger.debug("Diagonalized %dx%d block, spectrum [%.6g, %.6g]", matrix.shape[0], matrix.shape[0], eigenvalues[0], eigenvalues[-1])
    return eigenvalues, eigenvectors


def group_levels(eigenvalues: np.ndarray, eigenvectors: np.ndarray, omega_n0: float, p_values: np.ndarray | None = None, margin: float | None = None) -> SpectrumGroups:
    """
    Assign eigenpairs to Mathieu-like groups.

    With `p_values` (the p of each basis row) a state belongs to group q = round(⟨p⟩),
    ⟨p⟩ = Σ_p p·w_p over the weights w_p of its eigenvector. Without them,
    q = round(E/ω_{n₀}).

    A state whose ⟨p⟩ lies within `margin` of a half-integer is claimed by two groups.
    Only states inside the central p range are checked; the truncation edges mix groups
    anyway and are never classified.

    Args:
        eigenvalues: Energies, one per column
        eigenvectors: Eigenvectors as columns
        omega_n0: Group spacing
        p_values: Optional p index of each basis row
        margin: Half-integer margin, defaults to classification.grouping_margin

    Returns:
        SpectrumGroups with levels sorted by energy and s starting at 0

    Raises:
        GroupingError: If a central state cannot be assigned to a unique group
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    count = eigenvalues.shape[0]

    if p_values is None:
        q_labels = np.rint(eigenvalues / omega_n0).astype(int)
    else:
        if margin is None:
            margin = float(get_config().classification["grouping_margin"])
        p_values = np.asarray(p_values, dtype=float)
        weights = np.abs(np.asarray(eigenvectors)) ** 2
        mean_p = (p_values @ weights) / np.sum(weights, axis=0)
        q_labels = np.rint(mean_p).astype(int)

        half = float(np.max(np.abs(p_values))) // 2
        offset = np.abs(np.abs(mean_p - np.floor(mean_p)) - 0.5)
        ambiguous = np.flatnonzero((offset <= margin) & (np.abs(mean_p) <= half + 0.5 + margin))
        if ambiguous.size:
            j = int(ambiguous[0])
            diagnostics: dict[str, Any] = {
                "column": j,
                "energy": float(eigenvalues[j]),
                "mean_p": float(mean_p[j]),
                "candidates": [int(np.floor(mean_p[j])), int(np.floor(mean_p[j])) + 1],
                "margin": margin,
                "ambiguous_count": int(ambiguous.size),
            }
            raise GroupingError(f"State {j} (E={eigenvalues[j]:.6g}, <p>={mean_p[j]:.4f}) cannot be assigned to a unique group: {diagnostics}", diagnostics=diagnostics)

    s_labels = np.zeros(count, dtype=int)
    groups = []
    for q in np.unique(q_labels):
        columns = np.flatnonzero(q_labels == q)
        columns = columns[np.argsort(eigenvalues[columns], kind="stable")]
        s_labels[columns] = np.arange(columns.size)
        levels = tuple(Level(s=s, energy=float(eigenvalues[c]), column=int(c)) for s, c in enumerate(columns))
        groups.append(Group(q=int(q), levels=levels))

    logger.debug("Grouped %d states into %d groups", count, len(groups))
    return SpectrumGroups(
        groups=tuple(groups),
        omega_n0=omega_n0,
        eigenvalues=eigenvalues,
        eigenvectors=np.asarray(eigenvectors),
        q_labels=q_labels,
        s_labels=s_labels,
    )


def _paired_levels(spacings: np.ndarray, start: int, pair_ratio: float) -> set[int]:
    """Levels from `start` upward that sit in quasi-degenerate pairs."""
    paired: set[int] = set()
    i = start
    while i < spacings.size:
        lo, hi = max(start, i - 2), min(spacings.size, i + 3)
        local_mean = float(np.mean(spacings[lo:hi]))
        if local_mean > 0 and spacings[i] < pair_ratio * local_mean:
            paired.update((i, i + 1))
            i += 2
        else:
            i += 1
    return paired


def classify_group(group: Group, thresholds: dict[str, Any] | None = None) -> tuple[Group, SeparatrixInfo]:
    """
    Locate the separatrix of a group and label its levels.

    The spacing around level s is σ_s = ½(Δ_{s-1} + Δ_s). The separatrix sits at the
    minimum of σ (the accumulation point). The near-separatrix band is the contiguous
    run of levels around it with σ below `band_fraction` times the mean spacing of
    the bottom levels. Below the band a level is inside when σ is within
    `inside_tolerance` of that bottom spacing; above it a level is above the separatrix
    when it belongs to a pair with a gap below `pair_ratio` of the local mean spacing.
    Every other level is unclassified.

    Args:
        group: Group with at least 8 levels
        thresholds: Overrides for inside_tolerance, pair_ratio, band_fraction, bottom_levels

    Returns:
        (classified group, SeparatrixInfo)

    Raises:
        ClassificationError: If the group is too small or the spacing minimum is at an edge
    """
    settings = dict(get_config().classification)
    settings.update(thresholds or {})
    n_levels = len(group.levels)
    if n_levels < MIN_CLASSIFIABLE_LEVELS:
        raise ClassificationError(f"Group q={group.q} has {n_levels} levels; at least {MIN_CLASSIFIABLE_LEVELS} are needed")

    spacings = group.spacings
    sigma = 0.5 * (spacings[:-1] + spacings[1:])  # sigma[s - 1] belongs to level s
    s_sep = int(np.argmin(sigma)) + 1
    if s_sep in (1, n_levels - 2):
        raise ClassificationError(f"Group q={group.q}: spacing minimum at s={s_sep} is at the edge of the group, no interior accumulation point")

    bottom = spacings[: int(settings["bottom_levels"])]
    inside_spacing = float(np.mean(bottom))
    bottom_spread = float(np.max(np.abs(bottom - inside_spacing)) / inside_spacing)

    cut = float(settings["band_fraction"]) * inside_spacing
    lo = hi = s_sep
    while lo - 1 >= 1 and sigma[lo - 2] < cut:
        lo -= 1
    while hi + 1 <= n_levels - 2 and sigma[hi] < cut:
        hi += 1

    level_spacing = np.concatenate([spacings[:1], sigma, spacings[-1:]])
    tolerance = float(settings["inside_tolerance"]) * inside_spacing
    paired = _paired_levels(spacings, hi + 1, float(settings["pair_ratio"]))
    above_count = n_levels - hi - 1
    pair_fraction = len(paired) / above_count if above_count >= 2 else 0.0

    levels = []
    for level in group.levels:
        if lo <= level.s <= hi:
            level_class = LevelClass.NEAR_SEPARATRIX
        elif level.s < lo and abs(level_spacing[level.s] - inside_spacing) <= tolerance:
            level_class = LevelClass.INSIDE
        elif level.s > hi and level.s in paired:
            level_class = LevelClass.ABOVE_SEPARATRIX
        else:
            level_class = LevelClass.UNCLASSIFIED
        levels.append(dataclasses.replace(level, level_class=level_class))

    info = SeparatrixInfo(
        q=group.q,
        s_sep=s_sep,
        M_s=hi - lo + 1,
        band=(lo, hi),
        inside_spacing=inside_spacing,
        pair_fraction=pair_fraction,
        spacing_profile=tuple(float(x) for x in spacings),
        bottom_spread=bottom_spread,
    )
    unclassified = sum(level.level_class == LevelClass.UNCLASSIFIED for level in levels)
    logger.debug("Group q=%d: s_sep=%d, M_s=%d, band=%s, pair fraction %.2f, bottom spread %.3f, %d unclassified", group.q, s_sep, info.M_s, info.band, pair_fraction, bottom_spread, unclassified)
    return Group(q=group.q, levels=tuple(levels)), info


def classify_central_groups(groups: SpectrumGroups, thresholds: dict[str, Any] | None = None) -> tuple[SpectrumGroups, dict[int, SeparatrixInfo], list[str]]:
    """
    Classify every central group.

    Returns:
        (groups with classified levels, separatrix info per classified q, warnings for
        edge groups and for central groups without an interior separatrix)
    """
    infos: dict[int, SeparatrixInfo] = {}
    warnings: list[str] = []
    central = set(groups.central_qs())
    edge = [q for q in groups.qs if q not in central]
    if edge:
        message = f"Edge groups excluded from classification: q in [{min(edge)}, {max(edge)}] ({len(edge)} groups)"
        logger.warning(message)
        warnings.append(message)
    for q in sorted(central):
        try:
            classified, info = classify_group(groups.group(q), thresholds)
        except ClassificationError as e:
            logger.warning("Group q=%d left unclassified: %s", q, e)
            warnings.append(f"Group q={q} left unclassified: {e}")
            continue
        groups = groups.with_group(classified)
        infos[q] = info
    return groups, infos, warnings


def project_onto_groups(state: np.ndarray, groups: SpectrumGroups) -> np.ndarray:
    """
    Amplitudes C_{q,s} of a state given over the (r, p) basis.

    Args:
        state: Vector (or matrix of column vectors) over the resonance basis
        groups: Spectrum with the eigenbasis

    Returns:
        C = V†ψ, indexed like the eigenvector columns (see q_labels, s_labels)

    Raises:
        ValueError: On dimension mismatch
    """
    state = np.asarray(state)
    if state.shape[0] != groups.eigenvectors.shape[0]:
        raise ValueError(f"State dimension {state.shape[0]} does not match the basis dimension {groups.eigenvectors.shape[0]}")
    return groups.eigenvectors.conj().T @ state


def reconstruct_state(amplitudes: np.ndarray, groups: SpectrumGroups) -> np.ndarray:
    """Inverse of `project_onto_groups`: ψ = V·C."""
    amplitudes = np.asarray(amplitudes)
    if amplitudes.shape[0] != groups.eigenvectors.shape[1]:
        raise ValueError(f"Amplitude dimension {amplitudes.shape[0]} does not match the number of eigenstates {groups.eigenvectors.shape[1]}")
    return groups.eigenvectors @ amplitudes


def compute_spectrum(params: ModelParams, truncation: Truncation) -> tuple[ResonanceBlock, SpectrumGroups]:
    """Build, diagonalize and group the resonance block."""
    block = build_resonance_block(params, truncation)
    eigenvalues, eigenvectors = diagonalize_block(block)
    groups = group_levels(eigenvalues, eigenvectors, params.omega_n0, block.p_values)
    return block, groups


def check_truncation_convergence(params: ModelParams, truncation: Truncation, tracked: int) -> ConvergenceSummary:
    """
    Compare the lowest `tracked` levels of group q=0 against a run with the p window doubled.

    Energies are compared relative to max(|E|, ω_{n₀}), since they are counted from
    E⁰_{n₀m₀} and can sit near zero.

    Returns:
        ConvergenceSummary; converged when the largest relative change is below 1e-6
    """
    _, base = compute_spectrum(params, truncation)
    _, wide = compute_spectrum(params, truncation.doubled_p())
    e_base = base.group(0).energies
    e_wide = wide.group(0).energies
    count = min(tracked, e_base.size, e_wide.size)
    scale = np.maximum(np.abs(e_wide[:count]), params.omega_n0)
    change = float(np.max(np.abs(e_base[:count] - e_wide[:count]) / scale)) if count else 0.0
    converged = change < CONVERGENCE_THRESHOLD
    logger.info("Truncation convergence: %d levels, max relative change %.3g (%s)", count, change, "converged" if converged else "not converged")
    return ConvergenceSummary(max_relative_change=change, converged=converged, tracked_levels=count)


def scan_separatrix(params: ModelParams, truncation: Truncation, amplitudes: list[float], thresholds: dict[str, Any] | None = None) -> list[SeparatrixScanPoint]:
    """
    Separatrix layer size M_s of group q=0 for each ripple amplitude.

    Amplitudes whose group cannot be classified are reported with M_s = 0 and s_sep = -1.
    """
    points = []
    for a in amplitudes:
        _, groups = compute_spectrum(params.with_amplitude(a), truncation)
        try:
            _, info = classify_group(groups.group(0), thresholds)
            m_s, s_sep = info.M_s, info.s_sep
        except ClassificationError as e:
            logger.warning("Separatrix scan at a=%s: %s", a, e)
            m_s, s_sep = 0, -1
        points.append(SeparatrixScanPoint(a=a, inv_sqrt_a=float(a**-0.5) if a > 0 else float("inf"), M_s=m_s, s_sep=s_sep))
    return points
