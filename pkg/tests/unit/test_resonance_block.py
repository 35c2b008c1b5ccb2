"""
Unit tests for resonance block assembly.
"""

import math

import numpy as np
import pytest
from unittest.mock import patch

from arnold_waveguide.errors import ContractViolationError, DomainError
from arnold_waveguide.physics.basis import ResonanceIndex, Truncation
from arnold_waveguide.physics.matrix_elements import ripple_matrix_element
from arnold_waveguide.physics.resonance_block import build_resonance_block, hermiticity_norm, resonance_diagonal


@pytest.fixture
def n400_block(make_params, small_truncation):
    return build_resonance_block(make_params(n0=400, m0=400), small_truncation)


class TestBuildResonanceBlock:
    def test_reference_coupling_element(self, n400_block):
        """(r,p) = (0,0) → (1,1) keeps m = 400 and moves n from 400 to 401."""
        assert n400_block.element(ResonanceIndex(0, 0), ResonanceIndex(1, 1)) == pytest.approx(-254.648, abs=1e-3)

    def test_mode_mixing_element(self, n400_block):
        expected = ripple_matrix_element(400, 400, 401, 399, 0.1, 0.01, math.pi)
        assert n400_block.element(ResonanceIndex(0, 0), ResonanceIndex(1, 0)) == pytest.approx(expected, rel=1e-12)

    def test_hermitian(self, n400_block):
        assert n400_block.dimension == 153
        assert hermiticity_norm(n400_block.matrix) < 1e-10
        assert np.array_equal(n400_block.matrix, n400_block.matrix.T)

    def test_only_neighbouring_r_blocks(self, n400_block):
        far = n400_block.matrix[n400_block.r_values[:, None] - n400_block.r_values[None, :] == 2]
        assert np.all(far == 0.0)

    def test_diagonal(self, n400_block, make_params):
        params = make_params(n0=400, m0=400)
        r, p = n400_block.r_values, n400_block.p_values
        assert np.allclose(np.diag(n400_block.matrix), resonance_diagonal(r, p, params))
        assert n400_block.element(ResonanceIndex(0, 0), ResonanceIndex(0, 0)) == 0.0
        # one transverse quantum up: p = 1, r = 0 → ω_m0 + π²/(2d²)
        assert n400_block.element(ResonanceIndex(0, 1), ResonanceIndex(0, 1)) == pytest.approx(params.omega_m0 + 0.5)

    def test_flat_channel_is_diagonal(self, make_params, small_truncation):
        block = build_resonance_block(make_params(a=0.0), small_truncation)
        assert np.count_nonzero(block.matrix - np.diag(np.diag(block.matrix))) == 0

    def test_read_only(self, n400_block):
        with pytest.raises(ValueError):
            n400_block.matrix[0, 0] = 1.0

    def test_index_maps(self, n400_block):
        index = n400_block.index_of(2, -1)
        assert n400_block.index_map[index] == ResonanceIndex(2, -1)
        assert n400_block.m_values[index] == 400 - 1 - 2
        assert n400_block.n_values[index] == 402

    def test_truncation_reaching_mode_zero(self, make_params):
        with pytest.raises(DomainError):
            build_resonance_block(make_params(), Truncation.symmetric(100, 4))

    def test_hermiticity_contract(self, make_params, small_truncation):
        with patch("arnold_waveguide.physics.resonance_block.get_tolerance", return_value=-1.0):
            with pytest.raises(ContractViolationError):
                build_resonance_block(make_params(), small_truncation)
