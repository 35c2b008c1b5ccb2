"""
This module defines core data structures, enumerations, and models used in the project.
"""

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_core import PydanticCustomError

from arnold_waveguide.config import get_tolerance


# Default driving harmonics: T = 7·2π/Ω₁ = 9·2π/Ω₂
DEFAULT_CYCLES = (7, 9)
DEFAULT_FORCE_RATIO = 1000.0


# Enums
class RunKind(StrEnum):
    """
    Experiment selected by a run configuration.
    """

    SPECTRUM = "spectrum"
    EVOLVE = "evolve"
    QE = "qe"
    CLASSICAL = "classical"
    COMPARE = "compare"


class ScaleName(StrEnum):
    """
    Parameter presets. 'paper' is the full n0 = m0 = 400 set, 'ci' a scaled-down resonance.
    """

    PAPER = "paper"
    CI = "ci"


class InitialStateSelector(StrEnum):
    """
    How the initial (q=0, s) eigenstate of an evolution run is chosen.
    """

    BOTTOM = "bottom"
    NEAR_SEPARATRIX = "near_separatrix"
    ABOVE_SEPARATRIX = "above_separatrix"
    EXPLICIT = "explicit"


class LevelClass(StrEnum):
    """
    Position of a level relative to the separatrix of its group.
    """

    INSIDE = "inside"
    NEAR_SEPARATRIX = "near_separatrix"
    ABOVE_SEPARATRIX = "above_separatrix"
    UNCLASSIFIED = "unclassified"


class EnergyMode(StrEnum):
    """
    Energy bookkeeping for the classical ensemble.
    """

    TOTAL = "total"
    KINETIC = "kinetic"


class LocalizationStatus(StrEnum):
    """
    Outcome of the dynamical-localization detector.
    """

    SATURATED = "saturated"
    NON_DIFFUSIVE = "non_diffusive"
    GROWING = "growing"


def _invariant(key: str, message: str) -> PydanticCustomError:
    """Build the validation error used for physical invariant violations."""
    return PydanticCustomError("invariant_violation", "{key}: " + message, {"key": key})


def commensurate_driving(omega: float, cycles: tuple[int, int] = DEFAULT_CYCLES) -> tuple[float, float, float]:
    """
    Two commensurate driving frequencies centred on `omega`.

    With cycles (j₁, j₂) the frequencies are Ω₁ = 2ωj₁/(j₁+j₂) and Ω₂ = 2ωj₂/(j₁+j₂),
    so their mean is exactly ω and one period T = π(j₁+j₂)/ω holds j₁ and j₂ full cycles.

    Args:
        omega: Centre frequency, usually ω_{n₀}
        cycles: Integer cycle counts (j₁, j₂) per driving period

    Returns:
        (omega1, omega2, period)
    """
    j1, j2 = cycles
    if omega <= 0 or j1 < 1 or j2 < 1:
        raise ValueError(f"Invalid commensurate driving request: omega={omega}, cycles={cycles}")
    total = j1 + j2
    return 2.0 * omega * j1 / total, 2.0 * omega * j2 / total, math.pi * total / omega


@dataclass(frozen=True)
class DrivingField:
    """
    Two-frequency transverse field, V(y, t) = -f₀·f_scale·y·(cos Ω₁t + cos Ω₂t).
    """

    f0: float
    omega1: float
    omega2: float
    period: float
    f_scale: float = 1.0

    @property
    def frequencies(self) -> tuple[float, float]:
        return self.omega1, self.omega2

    @property
    def amplitude(self) -> float:
        """Effective force amplitude f₀·f_scale."""
        return self.f0 * self.f_scale

    def force(self, t: Any) -> Any:
        """Transverse force f_y(t); accepts scalars or numpy arrays."""
        return self.amplitude * (np.cos(self.omega1 * t) + np.cos(self.omega2 * t))

    def cycles(self) -> tuple[float, float]:
        """Number of oscillations of each component within one period."""
        return self.period * self.omega1 / (2 * math.pi), self.period * self.omega2 / (2 * math.pi)


class ModelParams(BaseModel):
    """
    Resolved physical and numerical parameters of the waveguide, resonance and driving.

    Energies are dimensionless with unit mass and ħ = 1. The channel is 0 < y < d + a·cos x.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    d: float = Field(default=math.pi, gt=0, description="Channel width")
    a: float = Field(default=0.01, ge=0, description="Ripple amplitude; a=0 is the integrable limit")
    k: float = Field(default=0.1, description="Bloch wave number in the open first Brillouin zone, k != 0")
    n0: int = Field(description="Longitudinal resonance index")
    m0: int = Field(ge=1, description="Transverse resonance index")
    f0: float = Field(default=10.0, ge=0, description="Driving amplitude")
    omega1: float = Field(gt=0, description="First driving frequency")
    omega2: float = Field(gt=0, description="Second driving frequency")
    period: float = Field(gt=0, description="Driving period T")

    @property
    def epsilon(self) -> float:
        return self.a / self.d

    @property
    def direction(self) -> int:
        """+1 for the co-propagating branch (n₀ ≥ 0), -1 for the counter-propagating one."""
        return 1 if self.n0 >= 0 else -1

    @property
    def omega_n0(self) -> float:
        """Longitudinal resonance frequency ω_{n₀}, also the spacing between level groups."""
        return self.direction * (self.n0 + self.k) + 0.5

    @property
    def omega_m0(self) -> float:
        """Transverse resonance frequency ω_{m₀} = π²(2m₀+1)/(2d²)."""
        return math.pi**2 * (2 * self.m0 + 1) / (2 * self.d**2)

    def driving(self, f_scale: float = 1.0) -> DrivingField:
        return DrivingField(f0=self.f0, omega1=self.omega1, omega2=self.omega2, period=self.period, f_scale=f_scale)

    def with_amplitude(self, a: float, f0: float | None = None) -> "ModelParams":
        """Copy with a different ripple amplitude (and optionally driving amplitude), re-validated."""
        data = self.model_dump()
        data["a"] = a
        if f0 is not None:
            data["f0"] = f0
        return ModelParams.model_validate(data)

    @field_validator("k")
    @classmethod
    def validate_bloch_number(cls, v: float) -> float:
        if not -0.5 < v < 0.5:
            raise _invariant("k", f"Bloch number {v} must lie strictly inside (-1/2, 1/2)")
        if v == 0:
            raise _invariant("k", "Bloch number k=0 is a symmetry point and is not supported")
        return v

    @model_validator(mode="after")
    def validate_invariants(self) -> Self:
        if self.a >= self.d:
            raise _invariant("a", f"ripple amplitude {self.a} must be smaller than the width {self.d}")
        if self.epsilon >= 0.1:
            raise _invariant("a", f"a/d = {self.epsilon:.4g} is outside the first-order regime (< 0.1)")

        tol = get_tolerance("commensurability")
        for key, cycles in zip(("omega1", "omega2"), self.driving().cycles()):
            if abs(cycles - round(cycles)) > tol * max(1.0, abs(cycles)) or round(cycles) < 1:
                raise _invariant(key, f"T·{key}/2π = {cycles:.12g} is not an integer; the driving must be commensurate with T={self.period:.12g}")

        mean = 0.5 * (self.omega1 + self.omega2)
        detuning = abs(mean - self.omega_n0) / abs(self.omega_n0)
        if detuning > get_tolerance("resonance_detuning"):
            raise _invariant("omega1", f"(Ω₁+Ω₂)/2 = {mean:.6g} is detuned from ω_n0 = {self.omega_n0:.6g} by {detuning:.3%}")
        return self


# Run configuration
class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    """Geometry and resonance selection. Omitted n0/m0 are located from omega_target."""

    d: float = Field(default=math.pi, gt=0, description="Channel width")
    a: float = Field(default=0.01, ge=0, description="Ripple amplitude")
    k: float = Field(default=0.1, description="Bloch wave number")
    n0: int | None = Field(default=None, description="Longitudinal resonance index")
    m0: int | None = Field(default=None, description="Transverse resonance index")
    omega_target: float | None = Field(default=None, gt=0, description="Target resonance frequency; defaults to the scale preset")
    direction: int = Field(default=1, description="+1 for n0 > 0, -1 for the counter-propagating branch")

    @field_validator("direction")
    @classmethod
    def validate_direction(cls, v: int) -> int:
        if v not in (1, -1):
            raise PydanticCustomError("invalid_direction", f"Invalid direction '{v}'. Must be one of: (1, -1)")
        return v


class DrivingSection(_Section):
    """Two-frequency driving. Omitted frequencies are centred on ω_n0 with the given cycle counts."""

    f0: float = Field(default=10.0, ge=0, description="Driving amplitude")
    omega1: float | None = Field(default=None, gt=0, description="First driving frequency")
    omega2: float | None = Field(default=None, gt=0, description="Second driving frequency")
    period: float | None = Field(default=None, gt=0, description="Driving period; derived from omega1 and cycles[0] when omitted")
    cycles: tuple[int, int] = Field(default=DEFAULT_CYCLES, description="Oscillations of each frequency per period")
    f_scale: float = Field(default=1.0, ge=0, description="Extra multiplier on f0 used by the quantum drive")


class TruncationSection(_Section):
    """Resonance-block truncation r ∈ [-r_max, r_max], p ∈ [-p_window, p_window]."""

    r_max: int | None = Field(default=None, ge=1, description="Largest |r| kept")
    p_window: int | None = Field(default=None, ge=1, description="Largest |p| kept")
    q_window: int | None = Field(default=None, ge=1, description="Groups with |q| above this count as leakage")


class NumericsSection(_Section):
    """Time integration and fit settings."""

    steps_per_period: int | None = Field(default=None, ge=1, description="Split steps per driving period")
    n_total: int | None = Field(default=None, ge=1, description="Number of periods to evolve")
    record_every: int | None = Field(default=None, ge=1, description="Record stride in periods")
    fit_window: tuple[int, int] = Field(default=(20, 150), description="Period window [N_start, N_end] for diffusion fits")

    @field_validator("fit_window")
    @classmethod
    def validate_fit_window(cls, v: tuple[int, int]) -> tuple[int, int]:
        if not 0 <= v[0] < v[1]:
            raise PydanticCustomError("invalid_fit_window", f"Invalid fit_window {v}: need 0 <= start < end")
        return v


class InitialStateSection(_Section):
    """Initial eigenstate (q, s) of evolution runs."""

    q: int = Field(default=0, description="Group index")
    selector: InitialStateSelector = Field(default=InitialStateSelector.NEAR_SEPARATRIX, description="Level selector")
    s: int | None = Field(default=None, ge=0, description="Explicit level index, required for selector 'explicit'")

    @model_validator(mode="after")
    def validate_explicit_index(self) -> Self:
        if self.selector == InitialStateSelector.EXPLICIT and self.s is None:
            raise PydanticCustomError("missing_level_index", "initial_state.s is required when selector is 'explicit'")
        return self


class EnsembleSection(_Section):
    """Classical ensemble settings."""

    count: int | None = Field(default=None, ge=1, description="Number of trajectories")
    delta: float = Field(default=0.01, ge=0, le=0.05, description="Relative velocity offset toward the separatrix")
    seed: int = Field(default=0, ge=0, description="Root seed for the per-trajectory streams")
    eta: float = Field(default=1.0, gt=0, description="Coupling resonance ω_y/ω_x")
    energy_mode: EnergyMode = Field(default=EnergyMode.TOTAL, description="Energy written to classical.csv")
    poincare_trajectories: int = Field(default=5, ge=0, description="Trajectories recorded in poincare.csv")
    n_periods: int | None = Field(default=None, ge=1, description="Periods to integrate; defaults to the fit window end")


class SpectrumSection(_Section):
    """Extra stationary-spectrum diagnostics."""

    scan_amplitudes: list[float] = Field(default_factory=list, description="Amplitudes for the separatrix-count scan")
    check_convergence: bool = Field(default=False, description="Compare central-group energies against a doubled p window")


class CompareSection(_Section):
    """Quantum versus classical comparison grid."""

    amplitudes: list[float] = Field(default_factory=lambda: [0.006, 0.008, 0.01], min_length=1, description="Ripple amplitudes")
    force_ratio: float = Field(default=DEFAULT_FORCE_RATIO, gt=0, description="f0 = force_ratio·a")


class RunConfig(_Section):
    """
    One experiment. Unknown keys anywhere are rejected.
    """

    run: RunKind = Field(description="Experiment to execute")
    scale: ScaleName = Field(default=ScaleName.CI, description="Preset for omitted numerics and truncation")
    model: ModelSection = Field(default_factory=ModelSection)
    driving: DrivingSection = Field(default_factory=DrivingSection)
    truncation: TruncationSection = Field(default_factory=TruncationSection)
    numerics: NumericsSection = Field(default_factory=NumericsSection)
    initial_state: InitialStateSection = Field(default_factory=InitialStateSection)
    ensemble: EnsembleSection = Field(default_factory=EnsembleSection)
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    compare: CompareSection = Field(default_factory=CompareSection)
    output_dir: str | None = Field(default=None, description="Artifact folder; settings output_dir/<run> when omitted")

    def params(self) -> ModelParams:
        """
        Resolved ModelParams. Only valid after `pipeline.load_config` filled n0, m0 and the driving.

        Raises:
            ValueError: If resonance or driving fields are still unresolved
        """
        missing = [name for name, value in (("model.n0", self.model.n0), ("model.m0", self.model.m0), ("driving.omega1", self.driving.omega1), ("driving.omega2", self.driving.omega2), ("driving.period", self.driving.period)) if value is None]
        if missing:
            raise ValueError(f"Run configuration is not resolved, missing: {missing}")
        return ModelParams(
            d=self.model.d,
            a=self.model.a,
            k=self.model.k,
            n0=self.model.n0,
            m0=self.model.m0,
            f0=self.driving.f0,
            omega1=self.driving.omega1,
            omega2=self.driving.omega2,
            period=self.driving.period,
        )


# Result schemas
class SeparatrixSummary(BaseModel):
    """Separatrix structure of one central group."""

    q: int
    s_sep: int
    M_s: int
    pair_fraction: float
    bottom_spread: float = Field(description="Largest relative deviation of the bottom spacings from their mean")
    n_levels: int


class ConvergenceSummary(BaseModel):
    """Change of tracked energies when the p window is doubled."""

    max_relative_change: float
    converged: bool
    tracked_levels: int


class SeparatrixScanPoint(BaseModel):
    """M_s for one amplitude of the separatrix scan."""

    a: float
    inv_sqrt_a: float
    M_s: int
    s_sep: int


class SpectrumSummary(BaseModel):
    """Stationary spectrum diagnostics."""

    dimension: int
    n_groups: int
    central_groups: list[int]
    group_spacing_mean: float
    separatrix: list[SeparatrixSummary] = Field(default_factory=list)
    convergence: ConvergenceSummary | None = None
    scan: list[SeparatrixScanPoint] = Field(default_factory=list)


class EvolutionSummary(BaseModel):
    """Wave-packet evolution and quantum diffusion fit."""

    initial_q: int
    initial_s: int
    selector: InitialStateSelector
    steps_per_period: int
    unitarity_defect: float
    D_q: float
    slope_error: float
    fit_window: tuple[int, int]
    t_sat: float | None
    plateau_level: float | None
    localization: LocalizationStatus | None
    max_leakage: float


class QuasienergySummary(BaseModel):
    """Localization of quasienergy states in q-space."""

    n_states: int
    max_q_variance: float
    mean_q_variance: float
    q_window: int


class ClassicalSummary(BaseModel):
    """Classical ensemble diffusion."""

    energy: float
    count: int
    dropped: int
    energy_mode: EnergyMode
    D_cl: float
    slope_error: float
    D_cl_total: float
    D_cl_total_error: float
    D_cl_kinetic: float
    D_cl_kinetic_error: float


class RunSummary(BaseModel):
    """Contents of summary.json."""

    run: RunKind
    seed: int
    params_echo: dict[str, Any]
    spectrum: SpectrumSummary | None = None
    evolution: EvolutionSummary | None = None
    quasienergy: QuasienergySummary | None = None
    classical: ClassicalSummary | None = None


class CompareEntry(BaseModel):
    """Classical and quantum diffusion at one amplitude."""

    a: float
    f0: float
    D_cl: float
    D_cl_error: float
    D_q: float
    D_q_error: float
    ratio: float | None = Field(description="D_q / D_cl, None when D_cl is zero")


class CompareSummary(BaseModel):
    """Contents of compare.json."""

    force_ratio: float
    seed: int
    entries: list[CompareEntry]
    quantum_weaker: bool


class Manifest(BaseModel):
    """Contents of manifest.json."""

    tool: str
    version: str
    run: RunKind
    seed: int
    config: dict[str, Any]
    artifacts: list[str]
    warnings: list[str]
    wall_clock_seconds: float
