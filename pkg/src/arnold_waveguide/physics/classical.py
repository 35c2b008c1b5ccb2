"""
Classical point particle in the rippled channel 0 ≤ y ≤ d + a·cos x under the
two-frequency transverse force, with hard walls and specular reflection.

Between collisions the flight is integrated in closed form: x moves freely and y
follows the time-dependent force exactly. Collision times are found by sampling the
wall distance along the flight and refining the first sign change with Brent's method.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from arnold_waveguide.config import get_tolerance
from arnold_waveguide.errors import CollisionResolutionError, NoSolutionError
from arnold_waveguide.init import logger
from arnold_waveguide.models import DrivingField


COLLISION_XTOL = 1e-10
WALL_OFFSET = 1e-11
SEARCH_CHUNK = 64
SEARCH_STEP_FRACTION = 0.05
MIN_SECTION_BOUNCES = 100

Wall = Literal["bottom", "top"]


@dataclass(frozen=True)
class ClassicalState:
    x: float
    y: float
    vx: float
    vy: float
    t: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def kinetic_energy(self) -> float:
        return 0.5 * (self.vx**2 + self.vy**2)


@dataclass(frozen=True)
class Geometry:
    """Channel with a flat bottom at y=0 and a rippled top y = d + a·cos x."""

    d: float
    a: float

    def __post_init__(self) -> None:
        if self.d <= 0 or not 0 <= self.a < self.d:
            raise ValueError(f"Invalid channel geometry: d={self.d}, a={self.a}")

    def top(self, x: float | np.ndarray) -> float | np.ndarray:
        return self.d + self.a * np.cos(x)

    def top_normal(self, x: float) -> tuple[float, float]:
        """Unit normal of the top wall, the gradient of y - d - a·cos x."""
        nx, ny = self.a * math.sin(x), 1.0
        norm = math.hypot(nx, ny)
        return nx / norm, ny / norm

    def outside_by(self, state: ClassicalState) -> float:
        """Distance by which a state lies outside the channel, 0 when inside."""
        return max(0.0, -state.y, state.y - float(self.top(state.x)))


@dataclass(frozen=True)
class CollisionEvent:
    wall: Wall
    state: ClassicalState


@dataclass(frozen=True)
class ResonancePoint:
    """A resonance on the isoenergy curve E = ½(vx² + vy²)."""

    kind: Literal["coupling", "guiding"]
    label: str
    eta: float
    omega_x: float
    omega_y: float
    vx: float
    vy: float


def resonance_velocities(E: float, d: float, eta: float) -> tuple[float, float]:
    """
    Velocities on the energy surface where ω_y/ω_x = η.

    ω_x = vx for the 2π-periodic ripple and ω_y = π·vy/d for the transverse bounce.

    Raises:
        NoSolutionError: If E ≤ 0 or η ≤ 0
    """
    if not (E > 0 and math.isfinite(E)):
        raise NoSolutionError(f"Energy E={E} has no resonance velocities; E must be positive")
    if not (eta > 0 and math.isfinite(eta)):
        raise NoSolutionError(f"Resonance ratio eta={eta} is not reachable on the energy surface")
    ratio = eta * d / math.pi
    vx = math.sqrt(2.0 * E / (1.0 + ratio**2))
    return vx, ratio * vx


def resonance_map(E: float, d: float, max_order: int, driving: DrivingField | None = None) -> list[ResonancePoint]:
    """
    Coupling resonances η = i/j (i, j ≤ max_order, reduced) on the energy surface, and the
    guiding resonances ω_y = Ω₁, Ω₂ of the drive when they are reachable.
    """
    if max_order < 1:
        raise ValueError(f"max_order must be at least 1, got {max_order}")
    points = []
    seen = set()
    for j in range(1, max_order + 1):
        for i in range(1, max_order + 1):
            eta = Fraction(i, j)
            if eta in seen:
                continue
            seen.add(eta)
            vx, vy = resonance_velocities(E, d, float(eta))
            points.append(ResonancePoint(kind="coupling", label=f"{eta.numerator}/{eta.denominator}", eta=float(eta), omega_x=vx, omega_y=math.pi * vy / d, vx=vx, vy=vy))
    points.sort(key=lambda p: p.eta)

    if driving is not None:
        for label, omega in zip(("Omega1", "Omega2"), driving.frequencies):
            vy = omega * d / math.pi
            if vy**2 >= 2.0 * E:
                logger.debug("Guiding resonance %s=%s lies above the energy surface E=%s", label, omega, E)
                continue
            vx = math.sqrt(2.0 * E - vy**2)
            points.append(ResonancePoint(kind="guiding", label=label, eta=omega / vx, omega_x=vx, omega_y=omega, vx=vx, vy=vy))
    return points


def flight(state: ClassicalState, t: float | np.ndarray, field: DrivingField) -> tuple:
    """
    Closed-form collision-free motion from `state` to time(s) t.

    Returns:
        (x, y, vx, vy) at t; arrays when t is an array
    """
    tau = t - state.t
    vy = state.vy + 0.0 * tau
    y = state.y + state.vy * tau
    amplitude = field.amplitude
    if amplitude != 0.0:
        for omega in field.frequencies:
            s0, c0 = math.sin(omega * state.t), math.cos(omega * state.t)
            vy = vy + amplitude * (np.sin(omega * t) - s0) / omega
            y = y + amplitude * (-(np.cos(omega * t) - c0) / omega**2 - s0 * tau / omega)
    x = state.x + state.vx * tau
    return x, y, state.vx + 0.0 * tau, vy


def _state_at(state: ClassicalState, t: float, field: DrivingField) -> ClassicalState:
    x, y, vx, vy = flight(state, t, field)
    return ClassicalState(x=float(x), y=float(y), vx=float(vx), vy=float(vy), t=float(t))


def _wall_gap(state: ClassicalState, t: float, field: DrivingField, geometry: Geometry, wall: Wall) -> float:
    x, y, _, _ = flight(state, t, field)
    return float(y) if wall == "bottom" else float(geometry.top(x) - y)


def _next_collision(state: ClassicalState, t_end: float, field: DrivingField, geometry: Geometry) -> tuple[float, Wall] | None:
    speed = max(state.speed, 1e-12)
    step = SEARCH_STEP_FRACTION * (geometry.d - geometry.a) / speed
    t0 = state.t
    while t0 < t_end:
        times = np.minimum(t0 + step * np.arange(1, SEARCH_CHUNK + 1), t_end)
        x, y, _, _ = flight(state, times, field)
        gaps = {"bottom": y, "top": geometry.top(x) - y}
        hits = [(int(np.argmax(g <= 0)), wall) for wall, g in gaps.items() if np.any(g <= 0)]
        if hits:
            index = min(i for i, _ in hits)
            lo = t0 if index == 0 else float(times[index - 1])
            hi = float(times[index])
            roots = []
            for i, wall in hits:
                if i != index:
                    continue
                gap = lambda t, w=wall: _wall_gap(state, t, field, geometry, w)  # noqa: E731
                if gap(lo) <= 0:
                    roots.append((lo, wall))
                    continue
                try:
                    roots.append((brentq(gap, lo, hi, xtol=COLLISION_XTOL), wall))
                except (ValueError, RuntimeError) as e:
                    raise CollisionResolutionError(f"Collision with the {wall} wall in [{lo}, {hi}] could not be resolved: {e}") from e
            return min(roots)
        if times[-1] >= t_end:
            return None
        t0 = float(times[-1])
    return None


def _reflect(state: ClassicalState, wall: Wall, geometry: Geometry) -> ClassicalState:
    if wall == "bottom":
        return replace(state, y=max(state.y, WALL_OFFSET), vy=-state.vy)
    nx, ny = geometry.top_normal(state.x)
    dot = state.vx * nx + state.vy * ny
    top = float(geometry.top(state.x))
    return replace(state, y=min(state.y, top - WALL_OFFSET), vx=state.vx - 2.0 * dot * nx, vy=state.vy - 2.0 * dot * ny)


def advance_trajectory(
    state: ClassicalState,
    dt: float,
    field: DrivingField,
    geometry: Geometry,
    on_collision: Callable[[CollisionEvent], None] | None = None,
) -> ClassicalState:
    """
    Move a particle forward by dt, reflecting specularly at both walls.

    Args:
        state: Particle inside the channel
        dt: Time to advance, ≥ 0
        field: Transverse driving field
        geometry: Channel shape
        on_collision: Called with the reflected state after every collision

    Returns:
        State at t + dt

    Raises:
        CollisionResolutionError: If the particle is found outside the channel beyond the collision tolerance
    """
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    tolerance = get_tolerance("collision")
    if geometry.outside_by(state) > tolerance:
        raise CollisionResolutionError(f"Particle at (x={state.x}, y={state.y}) lies outside the channel")

    t_end = state.t + dt
    while True:
        hit = _next_collision(state, t_end, field, geometry)
        if hit is None:
            state = _state_at(state, t_end, field)
            break
        t_hit, wall = hit
        state = _state_at(state, t_hit, field)
        # collision times are resolved to 1e-10, so the position misfit scales with the speed
        if geometry.outside_by(state) > 10.0 * tolerance * (1.0 + state.speed):
            raise CollisionResolutionError(f"Particle left the channel by {geometry.outside_by(state):.3g} at t={t_hit}")
        state = _reflect(state, wall, geometry)
        if on_collision is not None:
            on_collision(CollisionEvent(wall=wall, state=state))

    if geometry.outside_by(state) > tolerance:
        raise CollisionResolutionError(f"Particle ended outside the channel by {geometry.outside_by(state):.3g} at t={state.t}")
    return state


def poincare_section(state: ClassicalState, n_bounces: int, field: DrivingField, geometry: Geometry, max_time: float | None = None) -> list[tuple[float, float]]:
    """
    (x mod 2π, vx) at successive bottom-wall collisions.

    Args:
        state: Initial state
        n_bounces: Number of bottom bounces to record, at least 100
        field: Driving field
        geometry: Channel shape
        max_time: Optional cap on the integration time

    Returns:
        Section points in collision order
    """
    if n_bounces < MIN_SECTION_BOUNCES:
        raise ValueError(f"A Poincaré section needs at least {MIN_SECTION_BOUNCES} bounces, got {n_bounces}")
    points: list[tuple[float, float]] = []

    def record(event: CollisionEvent) -> None:
        if event.wall == "bottom" and len(points) < n_bounces:
            points.append((float(np.mod(event.state.x, 2 * math.pi)), event.state.vx))

    # one bottom bounce per 2d/|vy| on average; advance in slices of a few bounces
    vy = max(abs(state.vy), 1e-12)
    chunk = 8 * geometry.d / vy
    t_limit = max_time if max_time is not None else math.inf
    while len(points) < n_bounces and state.t < t_limit:
        state = advance_trajectory(state, min(chunk, t_limit - state.t), field, geometry, on_collision=record)
    return points
