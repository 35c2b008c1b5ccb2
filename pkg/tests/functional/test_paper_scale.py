"""
Reproduction targets at the `paper` scale (n0 = m0 = 400, 7:9 driving at 350 and 450).

Each test runs for tens of minutes to hours and needs ARNOLD_WAVEGUIDE_PAPER_SCALE=1.
"""

import os

import pytest

from arnold_waveguide.models import LocalizationStatus
from arnold_waveguide.pipeline import run_pipeline


pytestmark = pytest.mark.skipif(os.getenv("ARNOLD_WAVEGUIDE_PAPER_SCALE") != "1", reason="Set ARNOLD_WAVEGUIDE_PAPER_SCALE=1 for paper-scale runs")


def evolve(experiment, selector: str, a: float = 0.01):
    config = experiment("evolve", scale="paper", model={"a": a}, driving={"f0": 1000 * a}, initial_state={"selector": selector})
    return config, run_pipeline(config).summary.evolution


class TestSpectrumStructure:
    def test_central_groups_are_pendulum_like(self, experiment):
        config = experiment("spectrum", scale="paper")
        summary = run_pipeline(config).summary.spectrum
        assert summary.group_spacing_mean == pytest.approx(config.params().omega_n0, rel=0.01)
        assert 0 in {info.q for info in summary.separatrix}
        for info in summary.separatrix:
            assert 1 < info.s_sep < info.n_levels - 2, info.q
            assert info.bottom_spread <= 0.05, info.q
            assert info.pair_fraction >= 0.8, info.q


class TestSeparatrixCount:
    def test_layer_holds_about_ten_states(self, experiment):
        summary = run_pipeline(experiment("spectrum", scale="paper", spectrum={"scan_amplitudes": [0.0025]})).summary.spectrum
        central = {info.q: info for info in summary.separatrix}
        assert 5 <= central[0].M_s <= 20
        # 1/√a = 20: the layer shrinks to a state or two
        assert summary.scan[0].M_s <= 2


class TestDiffusionDichotomy:
    @pytest.mark.parametrize("selector", ["bottom", "above_separatrix"])
    def test_regular_states_do_not_spread(self, experiment, selector):
        _, evolution = evolve(experiment, selector)
        assert abs(evolution.D_q) < 2 * evolution.slope_error

    def test_separatrix_state_spreads_then_localizes(self, experiment):
        config, evolution = evolve(experiment, "near_separatrix")
        assert evolution.D_q > 5 * evolution.slope_error
        period = config.driving.period
        assert evolution.localization == LocalizationStatus.SATURATED
        assert 100 * period <= evolution.t_sat <= 500 * period

    def test_diffusion_is_suppressed_at_small_ripple(self, experiment):
        _, evolution = evolve(experiment, "near_separatrix", a=0.0025)
        assert abs(evolution.D_q) < 2 * evolution.slope_error


class TestQuantumVersusClassical:
    def test_quantum_diffusion_is_weaker(self, experiment):
        summary = run_pipeline(experiment("compare", scale="paper", compare={"amplitudes": [0.006, 0.008, 0.01]})).summary
        assert summary.quantum_weaker
        for entry in summary.entries:
            assert entry.D_q > 5 * entry.D_q_error
            assert entry.D_cl > 5 * entry.D_cl_error
