"""
One-period evolution under the two-frequency drive, wave-packet evolution in the
(q, s) representation, diffusion and localization diagnostics, and quasienergy states.

The propagator is a symmetric split step: the resonance Hamiltonian is propagated
exactly in its eigenbasis and the drive, diagonal in r, as a kick at each step midpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, sparse

from arnold_waveguide.config import get_config, get_tolerance
from arnold_waveguide.errors import ClassificationError, FitError, IntegrationFailureError, ResolutionError, TruncationOverflowError, UnitarityError
from arnold_waveguide.init import logger
from arnold_waveguide.models import DrivingField, InitialStateSelector, LevelClass, LocalizationStatus
from arnold_waveguide.physics.fitting import fit_in_window, fit_slope
from arnold_waveguide.physics.matrix_elements import y_elements
from arnold_waveguide.physics.resonance_block import ResonanceBlock
from arnold_waveguide.physics.spectrum import SeparatrixInfo, SpectrumGroups, classify_group, diagonalize_block, project_onto_groups, reconstruct_state
from arnold_waveguide.utils import log_function_call


STEPS_PER_OSCILLATION = 100
MIN_LOCALIZATION_PERIODS = 500


@dataclass(frozen=True)
class PropagatorMatrix:
    """Evolution operator U(T) over the (r, p) basis."""

    U: np.ndarray = field(repr=False)
    step_count: int
    unitarity_defect: float
    period: float


@dataclass(frozen=True)
class WavepacketState:
    """Amplitudes C_{q,s}, indexed like the eigenvector columns, after N periods."""

    amplitudes: np.ndarray
    q_labels: np.ndarray
    periods: int = 0

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


@dataclass
class EvolutionRecord:
    """Time series of an evolution run, one entry per recorded period count."""

    periods: np.ndarray
    delta_q: np.ndarray
    q_bar: np.ndarray
    leakage: np.ndarray
    norm: np.ndarray
    period: float
    omega_n0: float
    warnings: list[str] = field(default_factory=list)
    final_state: WavepacketState | None = None

    @property
    def times(self) -> np.ndarray:
        return self.periods * self.period

    @property
    def energy_variance(self) -> np.ndarray:
        """(ΔH̄)² = ω²_{n₀}·Δ_q."""
        return self.omega_n0**2 * self.delta_q


@dataclass(frozen=True)
class LocalizationResult:
    t_sat: float | None
    plateau_level: float
    status: LocalizationStatus
    lead_slope: float


@dataclass(frozen=True)
class QuasienergyState:
    quasienergy: float
    q_variance: float
    q_bar: float


def position_blocks(block: ResonanceBlock) -> list[np.ndarray]:
    """Transverse coordinate y within each fixed-r block, ordered by r."""
    trunc = block.truncation
    p_axis = np.arange(trunc.p_min, trunc.p_max + 1)
    blocks = []
    for r in range(-trunc.r_max, trunc.r_max + 1):
        m = block.params.m0 + p_axis - r
        blocks.append(y_elements(m[:, None], m[None, :], block.params.d))
    return blocks


def position_operator(block: ResonanceBlock) -> sparse.csr_matrix:
    """y over the full (r, p) basis; block-diagonal in r."""
    return sparse.block_diag(position_blocks(block), format="csr")


def driving_matrix(t: float, field: DrivingField, block: ResonanceBlock) -> sparse.csr_matrix:
    """
    Driving potential V(t) = -f₀·f_scale·(cos Ω₁t + cos Ω₂t)·y over the (r, p) basis.

    Args:
        t: Time
        field: Driving field
        block: Resonance block providing the index map and width

    Returns:
        Sparse Hermitian matrix, diagonal in r
    """
    return (-float(field.force(t)) * position_operator(block)).tocsr()


def required_steps(field: DrivingField, y_norm: float) -> int:
    """
    Minimum split steps per period: 100 per fastest oscillation, either of the drive
    itself or of the driving term's spectral radius 2·f₀·f_scale·‖y‖.
    """
    turns = field.period / (2 * math.pi)
    fastest = max(max(field.frequencies) * turns, 2 * abs(field.amplitude) * y_norm * turns)
    return math.ceil(STEPS_PER_OSCILLATION * fastest - 1e-9)


def unitarity_defect(U: np.ndarray) -> float:
    """‖U†U - I‖_max."""
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


@log_function_call
def one_period_propagator(block: ResonanceBlock, field: DrivingField, steps: int, eigensystem: tuple[np.ndarray, np.ndarray] | None = None) -> PropagatorMatrix:
    """
    U(T) by symmetric splitting with `steps` kicks at the step midpoints.

    Args:
        block: Resonance block
        field: Driving field; its period sets T
        steps: Number of split steps per period
        eigensystem: Precomputed (eigenvalues, eigenvectors) of the block

    Returns:
        PropagatorMatrix

    Raises:
        ResolutionError: If steps violates the resolution contract
        IntegrationFailureError: If ‖U†U - I‖_max exceeds the unitarity tolerance
    """
    energies, vectors = eigensystem if eigensystem is not None else diagonalize_block(block)
    period = field.period
    dt = period / steps

    y_values, y_vectors = zip(*(linalg.eigh(y) for y in position_blocks(block)))
    lam = np.concatenate(y_values)
    y_norm = float(np.max(np.abs(lam))) if lam.size else 0.0
    minimum = required_steps(field, y_norm)
    if steps < minimum:
        raise ResolutionError(f"{steps} steps per period are too few; the drive needs at least {minimum} (spectral radius {2 * abs(field.amplitude) * y_norm:.4g})")

    if field.amplitude == 0.0:
        U = (vectors * np.exp(-1j * energies * period)) @ vectors.conj().T
    else:
        W = linalg.block_diag(*y_vectors)
        full_step = (vectors * np.exp(-1j * energies * dt)) @ vectors.conj().T
        half_step = (vectors * np.exp(-0.5j * energies * dt)) @ vectors.conj().T
        coupled = W.T @ full_step @ W

        midpoints = (np.arange(1, steps + 1) - 0.5) * dt
        forces = field.force(midpoints)
        M = np.diag(np.exp(1j * dt * forces[0] * lam))
        for force in forces[1:]:
            M = np.exp(1j * dt * force * lam)[:, None] * (coupled @ M)
        U = half_step @ W @ M @ W.T @ half_step

    defect = unitarity_defect(U)
    tolerance = get_tolerance("unitarity")
    if defect > tolerance:
        raise IntegrationFailureError(f"Propagator unitarity defect {defect:.3g} exceeds {tolerance:.1g}; increase steps_per_period (currently {steps})")
    logger.info("One-period propagator: dim=%d, steps=%d, unitarity defect %.3g", U.shape[0], steps, defect)
    return PropagatorMatrix(U=U, step_count=steps, unitarity_defect=defect, period=period)


def variance_q(state: WavepacketState) -> tuple[float, float]:
    """
    Spread of a wave packet over groups.

    Returns:
        (Δ_q, q̄) with q̄ = Σ_q q·w_q and Δ_q = Σ_q (q - q̄)²·w_q, w_q = Σ_s |C_{q,s}|²
    """
    weights = np.abs(np.asarray(state.amplitudes)) ** 2
    q = np.asarray(state.q_labels, dtype=float)
    q_bar = float(np.sum(q * weights))
    delta_q = float(np.sum((q - q_bar) ** 2 * weights))
    return delta_q, q_bar


def _leakage(weights: np.ndarray, q_labels: np.ndarray, q_window: int | None) -> float:
    if q_window is None:
        return 0.0
    return float(np.sum(weights[np.abs(q_labels) > q_window]))


def select_initial_state(groups: SpectrumGroups, q: int, selector: InitialStateSelector, s: int | None = None, info: SeparatrixInfo | None = None) -> tuple[WavepacketState, int]:
    """
    Single eigenstate (q, s) resolved from a level selector.

    'bottom' is s=0, 'near_separatrix' the separatrix level, 'above_separatrix' the
    paired level above the band closest to twice the separatrix index (any level above
    the band when the group carries no classes).

    Returns:
        (initial state, resolved s)

    Raises:
        ClassificationError: If the group has no level of the requested class
        KeyError: If q or an explicit s does not exist
    """
    group = groups.group(q)
    if selector == InitialStateSelector.EXPLICIT:
        if s is None:
            raise ValueError("An explicit level index is required for selector 'explicit'")
        resolved = s
    elif selector == InitialStateSelector.BOTTOM:
        resolved = 0
    else:
        if info is None:
            group, info = classify_group(group)
        if selector == InitialStateSelector.NEAR_SEPARATRIX:
            resolved = info.s_sep
        else:
            beyond = group.levels[info.band[1] + 1 :]
            above = [level.s for level in beyond if level.level_class == LevelClass.ABOVE_SEPARATRIX] or [level.s for level in beyond]
            if not above:
                raise ClassificationError(f"Group q={q} has no level above the separatrix")
            resolved = min(above, key=lambda level_s: (abs(level_s - 2 * info.s_sep), level_s))

    if not 0 <= resolved < len(group.levels):
        raise KeyError(f"Level s={resolved} does not exist in group q={q} ({len(group.levels)} levels)")
    amplitudes = np.zeros(groups.eigenvectors.shape[1], dtype=complex)
    amplitudes[groups.column(q, resolved)] = 1.0
    logger.info("Initial state: q=%d, s=%d (%s)", q, resolved, selector)
    return WavepacketState(amplitudes=amplitudes, q_labels=groups.q_labels, periods=0), resolved


@log_function_call
def evolve(initial: WavepacketState, propagator: PropagatorMatrix, groups: SpectrumGroups, n_periods: int, record_every: int = 1, q_window: int | None = None) -> EvolutionRecord:
    """
    Apply U(T) repeatedly in the (r, p) basis and project onto (q, s) at record points.

    Period 0 is always recorded, as is the final period.

    Args:
        initial: Initial amplitudes C_{q,s}
        propagator: One-period evolution operator
        groups: Spectrum providing the projection
        n_periods: Number of periods N ≥ 1
        record_every: Record stride in periods
        q_window: Groups with |q| above this count as leakage

    Returns:
        EvolutionRecord

    Raises:
        TruncationOverflowError: If the leaked weight exceeds the abort threshold
    """
    if n_periods < 1:
        raise ValueError(f"n_periods must be at least 1, got {n_periods}")
    if record_every < 1:
        raise ValueError(f"record_every must be at least 1, got {record_every}")

    warn_level = get_tolerance("leakage_warning")
    abort_level = get_tolerance("leakage_abort")
    q_labels = groups.q_labels
    psi = reconstruct_state(np.asarray(initial.amplitudes, dtype=complex), groups)

    periods, deltas, means, leaks, norms = [], [], [], [], []
    warnings: list[str] = []
    warned = False
    amplitudes = np.asarray(initial.amplitudes, dtype=complex)

    for n in range(0, n_periods + 1):
        if n > 0:
            psi = propagator.U @ psi
        if n % record_every and n != n_periods:
            continue
        amplitudes = project_onto_groups(psi, groups)
        weights = np.abs(amplitudes) ** 2
        delta_q, q_bar = variance_q(WavepacketState(amplitudes=amplitudes, q_labels=q_labels, periods=n))
        leak = _leakage(weights, q_labels, q_window)
        periods.append(n)
        deltas.append(delta_q)
        means.append(q_bar)
        leaks.append(leak)
        norms.append(float(np.sum(weights)))

        if leak > abort_level:
            raise TruncationOverflowError(f"Wave packet leaked {leak:.2%} of its weight beyond |q| > {q_window} after {n} periods; enlarge the truncation")
        if leak > warn_level and not warned:
            message = f"Truncation leakage {leak:.2%} beyond |q| > {q_window} after {n} periods"
            logger.warning(message)
            warnings.append(message)
            warned = True

    logger.info("Evolved %d periods: final delta_q=%.6g, q_bar=%.6g", n_periods, deltas[-1], means[-1])
    return EvolutionRecord(
        periods=np.array(periods, dtype=int),
        delta_q=np.array(deltas),
        q_bar=np.array(means),
        leakage=np.array(leaks),
        norm=np.array(norms),
        period=propagator.period,
        omega_n0=groups.omega_n0,
        warnings=warnings,
        final_state=WavepacketState(amplitudes=amplitudes, q_labels=q_labels, periods=n_periods),
    )


def fit_diffusion(record: EvolutionRecord, window: tuple[int, int] = (20, 150)) -> tuple[float, float]:
    """
    Quantum diffusion coefficient D_q = d(ω²Δ_q)/dt over a period window.

    Args:
        record: Evolution record
        window: (N_start, N_end) in periods, inclusive

    Returns:
        (D_q, slope_error)

    Raises:
        FitError: If fewer than 10 records fall inside the window
    """
    mask = (record.periods >= window[0]) & (record.periods <= window[1])
    fit = fit_slope(record.times[mask], record.energy_variance[mask])
    logger.debug("Quantum diffusion fit over N in %s: D_q=%.6g +- %.3g", window, fit.slope, fit.slope_error)
    return fit.slope, fit.slope_error


def detect_localization(record: EvolutionRecord, window_periods: int | None = None) -> LocalizationResult:
    """
    Find where diffusive growth of the energy variance stops.

    A window of `window_periods` slides along the record. Growth is established when the
    leading window has a slope above twice its error. Saturation is the start of the
    first later window whose slope is consistent with zero (|slope| ≤ 2·error); the plateau
    is the mean from there to the end. A slow but significant residual slope is still growth.

    Returns:
        LocalizationResult; t_sat is None when growth persists to the end

    Raises:
        FitError: If the record is shorter than two windows
    """
    settings = get_config().localization
    window = int(window_periods if window_periods is not None else settings["window_periods"])

    periods = record.periods
    times = record.times
    variance = record.energy_variance
    start, end = int(periods[0]), int(periods[-1])
    if end - start < 2 * window:
        raise FitError(f"Localization detection needs at least {2 * window} periods, record spans {end - start}")
    if end - start < MIN_LOCALIZATION_PERIODS:
        logger.warning("Localization detection on a record of %d periods; %d are recommended", end - start, MIN_LOCALIZATION_PERIODS)

    stride = max(1, window // 10)
    starts = list(range(start, end - window + 1, stride))
    period = record.period

    lead = fit_in_window(times, variance, (starts[0] * period, (starts[0] + window) * period))
    if lead.slope <= 2 * lead.slope_error:
        plateau = float(np.mean(variance))
        logger.info("Localization: no diffusive phase (lead slope %.3g +- %.3g)", lead.slope, lead.slope_error)
        return LocalizationResult(t_sat=starts[0] * period, plateau_level=plateau, status=LocalizationStatus.NON_DIFFUSIVE, lead_slope=lead.slope)

    for s in starts[1:]:
        fit = fit_in_window(times, variance, (s * period, (s + window) * period))
        if abs(fit.slope) <= 2 * fit.slope_error:
            plateau = float(np.mean(variance[periods >= s]))
            logger.info("Localization: saturation at N=%d (t=%.6g), plateau %.6g", s, s * period, plateau)
            return LocalizationResult(t_sat=s * period, plateau_level=plateau, status=LocalizationStatus.SATURATED, lead_slope=lead.slope)

    tail = float(np.mean(variance[periods >= starts[-1]]))
    logger.info("Localization: growth persists to N=%d", end)
    return LocalizationResult(t_sat=None, plateau_level=tail, status=LocalizationStatus.GROWING, lead_slope=lead.slope)


def quasienergy_analysis(propagator: PropagatorMatrix, groups: SpectrumGroups) -> list[QuasienergyState]:
    """
    Quasienergy states of U(T) and their spread over groups.

    Uses the complex Schur form, whose vectors are orthonormal even for nearly
    degenerate eigenvalues.

    Returns:
        States sorted by quasienergy ε = -arg(λ)/T in [0, 2π/T)

    Raises:
        UnitarityError: If an eigenvalue modulus deviates from 1 by more than the tolerance
    """
    triangular, vectors = linalg.schur(propagator.U, output="complex")
    eigenvalues = np.diag(triangular)
    deviation = float(np.max(np.abs(np.abs(eigenvalues) - 1.0)))
    tolerance = get_tolerance("qe_modulus")
    if deviation > tolerance:
        raise UnitarityError(f"Evolution operator eigenvalue modulus deviates from 1 by {deviation:.3g} (tolerance {tolerance:.1g})")

    zone = 2 * math.pi / propagator.period
    quasienergies = np.mod(-np.angle(eigenvalues) / propagator.period, zone)

    weights = np.abs(project_onto_groups(vectors, groups)) ** 2
    q = groups.q_labels.astype(float)[:, None]
    q_bar = np.sum(q * weights, axis=0)
    q_variance = np.sum((q - q_bar[None, :]) ** 2 * weights, axis=0)

    order = np.argsort(quasienergies, kind="stable")
    logger.info("Quasienergy analysis: %d states, max q-variance %.4g", order.size, float(q_variance.max()) if order.size else 0.0)
    return [QuasienergyState(quasienergy=float(quasienergies[j]), q_variance=float(q_variance[j]), q_bar=float(q_bar[j])) for j in order]


def phase_mismatch(propagator: PropagatorMatrix, energies: np.ndarray) -> float:
    """
    Largest circular distance between exp(-iET) phases and the eigenphases of U(T).

    For an undriven propagator this is zero up to rounding.
    """
    eigenvalues = linalg.eigvals(propagator.U)
    phases = np.angle(eigenvalues)
    expected = np.angle(np.exp(-1j * np.asarray(energies) * propagator.period))
    distance = np.abs(np.angle(np.exp(1j * (expected[:, None] - phases[None, :]))))
    return float(np.max(np.min(distance, axis=1)))
