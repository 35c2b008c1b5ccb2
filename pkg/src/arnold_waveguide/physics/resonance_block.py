"""
Assembly of the resonance-reduced Hamiltonian over the truncated (r, p) basis.

Energies are counted from E⁰_{n₀m₀}(k). The diagonal is p·ω_{m₀} + ½(r² + π²(p-r)²/d²);
the ripple couples only neighbouring r blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from arnold_waveguide.config import get_tolerance
from arnold_waveguide.errors import ContractViolationError
from arnold_waveguide.init import logger
from arnold_waveguide.models import ModelParams
from arnold_waveguide.physics.basis import ResonanceIndex, Truncation
from arnold_waveguide.physics.matrix_elements import ripple_elements


@dataclass(frozen=True)
class ResonanceBlock:
    """
    Real symmetric (hence Hermitian) resonance Hamiltonian with its index map.

    Treat `matrix` as read-only; the block is shared between spectrum and propagator code.
    """

    matrix: np.ndarray
    params: ModelParams
    truncation: Truncation
    r_values: np.ndarray = field(repr=False)
    p_values: np.ndarray = field(repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def m_values(self) -> np.ndarray:
        return self.params.m0 + self.p_values - self.r_values

    @property
    def n_values(self) -> np.ndarray:
        return self.params.n0 + self.r_values

    @property
    def index_map(self) -> list[ResonanceIndex]:
        return [ResonanceIndex(r=int(r), p=int(p)) for r, p in zip(self.r_values, self.p_values)]

    def index_of(self, r: int, p: int) -> int:
        return self.truncation.index_of(r, p)

    def element(self, source: ResonanceIndex, target: ResonanceIndex) -> float:
        """Matrix entry ⟨target|H|source⟩."""
        return float(self.matrix[self.index_of(target.r, target.p), self.index_of(source.r, source.p)])


def resonance_diagonal(r: np.ndarray, p: np.ndarray, params: ModelParams) -> np.ndarray:
    """p·ω_{m₀} + ½(r² + π²(p-r)²/d²) for arrays of (r, p)."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(p, dtype=float)
    return p * params.omega_m0 + 0.5 * (r**2 + math.pi**2 * (p - r) ** 2 / params.d**2)


def hermiticity_norm(matrix: np.ndarray) -> float:
    """max |H - H†| elementwise."""
    if matrix.size == 0:
        return 0.0
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def build_resonance_block(params: ModelParams, truncation: Truncation) -> ResonanceBlock:
    """
    Assemble the resonance Hamiltonian.

    Only the r → r+1 blocks are computed; the r+1 → r blocks are their transposes,
    which makes the result symmetric to the last bit.

    Args:
        params: Model parameters with n₀, m₀ resolved
        truncation: Retained (r, p) window

    Returns:
        ResonanceBlock

    Raises:
        DomainError: If the truncation reconstructs a mode m < 1
        ContractViolationError: If the assembled matrix is not Hermitian
    """
    truncation.check_modes(params.m0)
    r_values, p_values = truncation.index_arrays()
    n_p = truncation.n_p
    dim = truncation.dimension

    matrix = np.zeros((dim, dim), dtype=float)
    matrix[np.diag_indices(dim)] = resonance_diagonal(r_values, p_values, params)

    if params.a != 0.0:
        p_axis = np.arange(truncation.p_min, truncation.p_max + 1)
        # rows: target p' in block r+1, columns: source p in block r
        p_target, p_source = np.meshgrid(p_axis, p_axis, indexing="ij")
        for r in range(-truncation.r_max, truncation.r_max):
            n = params.n0 + r
            m_source = params.m0 + p_source - r
            m_target = params.m0 + p_target - (r + 1)
            coupling = ripple_elements(n, m_source, n + 1, m_target, params.k, params.a, params.d)
            lo = (r + truncation.r_max) * n_p
            hi = lo + n_p
            matrix[hi : hi + n_p, lo:hi] = coupling
            matrix[lo:hi, hi : hi + n_p] = coupling.T

    defect = hermiticity_norm(matrix)
    if defect > get_tolerance("hermiticity"):
        raise ContractViolationError(f"Assembled resonance block is not Hermitian: max |H - H†| = {defect:.3g}")

    matrix.setflags(write=False)
    logger.debug("Built resonance block: dim=%d, r_max=%d, p=[%d, %d], a=%s", dim, truncation.r_max, truncation.p_min, truncation.p_max, params.a)
    return ResonanceBlock(matrix=matrix, params=params, truncation=truncation, r_values=r_values, p_values=p_values)
