"""
Trajectory ensembles seeded in the stochastic layer of a coupling resonance, and the
ensemble energy variance whose growth rate is the classical diffusion coefficient.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from arnold_waveguide.errors import CollisionResolutionError, NoSolutionError
from arnold_waveguide.init import logger
from arnold_waveguide.models import DrivingField, EnergyMode
from arnold_waveguide.physics.classical import ClassicalState, Geometry, advance_trajectory, resonance_velocities
from arnold_waveguide.utils import log_function_call


MAX_DELTA = 0.05


@dataclass(frozen=True)
class TrajectoryEnsemble:
    """
    Initial states of an ensemble. `streams[i]` is the index of the spawned
    seed sequence that generated trajectory i.
    """

    states: tuple[ClassicalState, ...]
    streams: tuple[int, ...]
    seed: int
    E0: float
    eta: float
    delta: float

    def __len__(self) -> int:
        return len(self.states)


@dataclass
class EnsembleRecord:
    """Ensemble statistics sampled at fixed times. NaN-valued trajectories are excluded."""

    times: np.ndarray
    var_total: np.ndarray
    mean_total: np.ndarray
    var_kinetic: np.ndarray
    mean_kinetic: np.ndarray
    n_active: np.ndarray
    dropped: int = 0
    warnings: list[str] = field(default_factory=list)

    def variance(self, mode: EnergyMode) -> np.ndarray:
        return self.var_total if mode == EnergyMode.TOTAL else self.var_kinetic

    def mean(self, mode: EnergyMode) -> np.ndarray:
        return self.mean_total if mode == EnergyMode.TOTAL else self.mean_kinetic


def seed_stochastic_layer(E: float, eta: float, delta: float, count: int, seed: int, geometry: Geometry) -> TrajectoryEnsemble:
    """
    Place trajectories on the energy surface next to the η resonance.

    Each trajectory gets vx = vx_res·(1 + u·delta) with u uniform in [-1, 1]. `delta` sets how
    far toward the separatrix the ensemble reaches; the sign of u picks the branch above or
    below the resonance torus. Positions take a uniform
    ripple phase x ∈ [0, 2π), a uniform bounce phase y ∈ (0, d - a) and a random sign of vy;
    vy then follows from the energy. Trajectory i draws from its own Philox stream spawned
    from `seed`, so the ensemble does not depend on the order of generation.

    Raises:
        ValueError: If count < 1 or delta is outside [0, 0.05]
        NoSolutionError: If an offset leaves no transverse energy
    """
    if count < 1:
        raise ValueError(f"Ensemble count must be at least 1, got {count}")
    if not 0 <= delta <= MAX_DELTA:
        raise ValueError(f"delta must lie in [0, {MAX_DELTA}], got {delta}")
    vx0, vy0 = resonance_velocities(E, geometry.d, eta)

    states = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        rng = np.random.Generator(np.random.Philox(child))
        u, x, y_fraction, sign = rng.uniform(-1.0, 1.0), rng.uniform(0.0, 2 * math.pi), rng.uniform(), rng.integers(0, 2)
        vx = vx0 * (1.0 + u * delta) if delta > 0 else vx0
        if delta > 0:
            transverse = 2.0 * E - vx**2
            if transverse <= 0:
                raise NoSolutionError(f"Velocity offset leaves no transverse energy for trajectory {i}")
            vy = math.sqrt(transverse)
        else:
            vy = vy0
        y = (geometry.d - geometry.a) * (y_fraction or 0.5)
        states.append(ClassicalState(x=float(x), y=float(y), vx=float(vx), vy=float(vy if sign else -vy), t=0.0))
    logger.info("Seeded %d trajectories at E=%s, eta=%s, delta=%s (vx=%.6g, vy=%.6g)", count, E, eta, delta, vx0, vy0)
    return TrajectoryEnsemble(states=tuple(states), streams=tuple(range(count)), seed=seed, E0=E, eta=eta, delta=delta)


def trajectory_energy(states: list[ClassicalState] | np.ndarray, t: float, driving: DrivingField, mode: EnergyMode = EnergyMode.TOTAL) -> np.ndarray:
    """
    Energy of each state: kinetic, plus -f_y(t)·y in total mode.

    Args:
        states: ClassicalState list, or an (n, 4) array of (x, y, vx, vy)
    """
    arr = np.asarray([(s.x, s.y, s.vx, s.vy) for s in states], dtype=float) if not isinstance(states, np.ndarray) else states
    energy = 0.5 * (arr[:, 2] ** 2 + arr[:, 3] ** 2)
    if mode == EnergyMode.TOTAL:
        energy = energy - float(driving.force(t)) * arr[:, 1]
    return energy


def classical_energy_variance(states: list[ClassicalState], t: float, driving: DrivingField, mode: EnergyMode = EnergyMode.TOTAL) -> float:
    """
    Population variance of the energy across the ensemble at time t.

    Raises:
        ValueError: If the ensemble is empty
    """
    if len(states) == 0:
        raise ValueError("Energy variance of an empty ensemble")
    return float(np.var(trajectory_energy(states, t, driving, mode)))


def _propagate(job: tuple[ClassicalState, DrivingField, Geometry, np.ndarray]) -> tuple[np.ndarray, str | None]:
    """Phase-space samples of one trajectory at the given times; NaN after a failure."""
    state, driving, geometry, times = job
    samples = np.full((times.size, 4), np.nan)
    for j, t in enumerate(times):
        try:
            state = advance_trajectory(state, float(t) - state.t, driving, geometry)
        except CollisionResolutionError as e:
            return samples, str(e)
        samples[j] = (state.x, state.y, state.vx, state.vy)
    return samples, None


@log_function_call
def run_ensemble(ensemble: TrajectoryEnsemble, driving: DrivingField, geometry: Geometry, times: np.ndarray, max_workers: int = 1) -> EnsembleRecord:
    """
    Propagate every trajectory and reduce the energy statistics at each sample time.

    Trajectories whose collision cannot be resolved are dropped from that time on and
    reported as warnings. Results do not depend on `max_workers`.

    Args:
        ensemble: Initial states
        driving: Driving field
        geometry: Channel shape
        times: Increasing sample times ≥ 0
        max_workers: Worker processes; 1 runs in-process

    Returns:
        EnsembleRecord
    """
    times = np.asarray(times, dtype=float)
    jobs = [(state, driving, geometry, times) for state in ensemble.states]
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(_propagate, jobs, chunksize=max(1, len(jobs) // (4 * max_workers))))
    else:
        results = [_propagate(job) for job in jobs]

    samples = np.stack([r[0] for r in results])  # (trajectory, time, coordinate)
    dropped = []
    for stream, (_, error) in zip(ensemble.streams, results):
        if error is not None:
            message = f"Trajectory {stream} dropped: {error}"
            logger.warning(message)
            dropped.append(message)

    kinetic = 0.5 * (samples[:, :, 2] ** 2 + samples[:, :, 3] ** 2)
    total = kinetic - driving.force(times)[None, :] * samples[:, :, 1]
    active = np.sum(~np.isnan(kinetic), axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        record = EnsembleRecord(
            times=times,
            var_total=np.nanvar(total, axis=0),
            mean_total=np.nanmean(total, axis=0),
            var_kinetic=np.nanvar(kinetic, axis=0),
            mean_kinetic=np.nanmean(kinetic, axis=0),
            n_active=active.astype(int),
            dropped=len(dropped),
            warnings=dropped,
        )
    logger.info("Ensemble of %d trajectories over t in [%.4g, %.4g]: %d dropped", len(ensemble), times[0], times[-1], record.dropped)
    return record
