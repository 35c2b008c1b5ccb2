"""
Unit tests for classical billiard motion in the rippled channel.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arnold_waveguide.errors import CollisionResolutionError, NoSolutionError
from arnold_waveguide.models import DrivingField, commensurate_driving
from arnold_waveguide.physics.classical import (
    ClassicalState,
    Geometry,
    advance_trajectory,
    flight,
    poincare_section,
    resonance_map,
    resonance_velocities,
)


FLAT = Geometry(d=math.pi, a=0.0)


class TestResonanceVelocities:
    @pytest.mark.parametrize("E,expected", [(160000.0, (400.0, 400.0)), (1.0, (1.0, 1.0))])
    def test_unit_ratio(self, E, expected):
        assert resonance_velocities(E, math.pi, 1.0) == pytest.approx(expected)

    def test_half_ratio(self):
        vx, vy = resonance_velocities(2.0, math.pi, 0.5)
        assert vy / vx == pytest.approx(0.5)
        assert 0.5 * (vx**2 + vy**2) == pytest.approx(2.0)

    @pytest.mark.parametrize("E,eta", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
    def test_no_solution(self, E, eta):
        with pytest.raises(NoSolutionError):
            resonance_velocities(E, math.pi, eta)

    @given(E=st.floats(1e-3, 1e6), eta=st.floats(1e-3, 1e3))
    def test_on_energy_surface(self, E, eta):
        vx, vy = resonance_velocities(E, math.pi, eta)
        assert 0.5 * (vx**2 + vy**2) == pytest.approx(E, rel=1e-9)
        # ω_y / ω_x = (π·vy/d) / vx
        assert vy / vx == pytest.approx(eta, rel=1e-9)


class TestResonanceMap:
    def test_coupling_orders(self):
        points = resonance_map(1.0, math.pi, 2)
        assert [p.label for p in points] == ["1/2", "1/1", "2/1"]
        assert all(p.kind == "coupling" for p in points)

    def test_reduced_fractions_only(self):
        labels = [p.label for p in resonance_map(1.0, math.pi, 4)]
        assert "2/2" not in labels and "2/4" not in labels
        assert len(labels) == len(set(labels)) == 11

    def test_guiding_resonances(self, desk_params):
        driving = desk_params.driving()
        guiding = [p for p in resonance_map(160000.0, math.pi, 1, driving) if p.kind == "guiding"]
        assert [p.label for p in guiding] == ["Omega1", "Omega2"]
        assert guiding[0].omega_y == pytest.approx(driving.omega1)
        assert 0.5 * (guiding[0].vx ** 2 + guiding[0].vy ** 2) == pytest.approx(160000.0)

    def test_unreachable_guiding_resonance_is_skipped(self, desk_params):
        assert all(p.kind == "coupling" for p in resonance_map(1.0, math.pi, 1, desk_params.driving()))

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            resonance_map(1.0, math.pi, 0)


class TestGeometry:
    @pytest.mark.parametrize("d,a", [(0.0, 0.0), (1.0, 1.0), (1.0, -0.1)])
    def test_invalid(self, d, a):
        with pytest.raises(ValueError):
            Geometry(d=d, a=a)

    def test_top_normal_is_unit(self):
        nx, ny = Geometry(d=math.pi, a=0.5).top_normal(math.pi / 2)
        assert math.hypot(nx, ny) == pytest.approx(1.0)
        assert nx / ny == pytest.approx(0.5)


class TestFlight:
    def test_free_flight(self, undriven):
        x, y, vx, vy = flight(ClassicalState(x=0.0, y=1.0, vx=2.0, vy=-0.5), 1.0, undriven)
        assert (x, y, vx, vy) == pytest.approx((2.0, 0.5, 2.0, -0.5))

    @settings(max_examples=25)
    @given(t=st.floats(0.1, 5.0))
    def test_velocity_is_derivative_of_position(self, t):
        omega1, omega2, period = commensurate_driving(100.6)
        field = DrivingField(f0=10.0, omega1=omega1, omega2=omega2, period=period)
        start = ClassicalState(x=0.0, y=1.0, vx=1.0, vy=0.3, t=0.05)
        h = 1e-6
        _, y_plus, _, _ = flight(start, t + h, field)
        _, y_minus, _, _ = flight(start, t - h, field)
        _, _, _, vy = flight(start, t, field)
        assert (y_plus - y_minus) / (2 * h) == pytest.approx(vy, rel=1e-5, abs=1e-5)

    def test_array_times(self, desk_params):
        x, y, vx, vy = flight(ClassicalState(x=0.0, y=1.0, vx=1.0, vy=0.0), np.linspace(0.0, 1.0, 5), desk_params.driving())
        assert x.shape == y.shape == vy.shape == (5,)
        assert y[0] == pytest.approx(1.0)


class TestAdvanceTrajectory:
    def test_bottom_bounce_flips_vy(self, undriven):
        events = []
        state = advance_trajectory(ClassicalState(x=0.0, y=0.5, vx=1.0, vy=-1.0), 1.0, undriven, FLAT, on_collision=events.append)
        assert [e.wall for e in events] == ["bottom"]
        assert events[0].state.t == pytest.approx(0.5)
        assert (state.x, state.y, state.vx, state.vy) == pytest.approx((1.0, 0.5, 1.0, 1.0), abs=1e-9)
        assert state.t == pytest.approx(1.0)

    def test_specular_reflection_on_ripple(self, undriven):
        """Vertical hit at x = π/2, where the top-wall normal is (a, 1)/√(1 + a²)."""
        geometry = Geometry(d=math.pi, a=0.5)
        events = []
        advance_trajectory(ClassicalState(x=math.pi / 2, y=1.0, vx=0.0, vy=1.0), 2.5, undriven, geometry, on_collision=events.append)
        assert [e.wall for e in events] == ["top"]
        assert events[0].state.t == pytest.approx(math.pi - 1.0, abs=1e-9)
        assert (events[0].state.vx, events[0].state.vy) == pytest.approx((-0.8, -0.6), abs=1e-9)

    def test_energy_conserved_without_drive(self, undriven):
        geometry = Geometry(d=math.pi, a=0.3)
        start = ClassicalState(x=0.3, y=1.2, vx=1.1, vy=0.9)
        collisions = []
        end = advance_trajectory(start, 40.0, undriven, geometry, on_collision=collisions.append)
        assert len(collisions) > 5
        assert end.kinetic_energy == pytest.approx(start.kinetic_energy, rel=1e-9)
        assert geometry.outside_by(end) == 0.0

    def test_driven_particle_stays_inside(self, desk_params):
        geometry = Geometry(d=math.pi, a=0.01)
        end = advance_trajectory(ClassicalState(x=0.0, y=1.0, vx=3.0, vy=2.0), 5.0, desk_params.driving(), geometry)
        assert geometry.outside_by(end) == 0.0

    def test_negative_dt(self, undriven):
        with pytest.raises(ValueError):
            advance_trajectory(ClassicalState(x=0.0, y=1.0, vx=1.0, vy=1.0), -1.0, undriven, FLAT)

    def test_start_outside(self, undriven):
        with pytest.raises(CollisionResolutionError):
            advance_trajectory(ClassicalState(x=0.0, y=-0.5, vx=1.0, vy=1.0), 1.0, undriven, FLAT)


class TestPoincareSection:
    def test_flat_channel_keeps_vx(self, undriven):
        points = poincare_section(ClassicalState(x=0.0, y=1.0, vx=0.3, vy=1.0), 100, undriven, FLAT)
        assert len(points) == 100
        assert all(0.0 <= x < 2 * math.pi for x, _ in points)
        assert all(vx == pytest.approx(0.3) for _, vx in points)
        # bottom bounces are 2d/|vy| apart, x advances by 0.3·2π
        assert (points[1][0] - points[0][0]) % (2 * math.pi) == pytest.approx(0.6 * math.pi, abs=1e-8)

    def test_time_cap(self, undriven):
        points = poincare_section(ClassicalState(x=0.0, y=1.0, vx=0.3, vy=1.0), 100, undriven, FLAT, max_time=20.0)
        assert len(points) == 3

    def test_too_few_bounces(self, undriven):
        with pytest.raises(ValueError, match="at least 100"):
            poincare_section(ClassicalState(x=0.0, y=1.0, vx=1.0, vy=1.0), 10, undriven, FLAT)
