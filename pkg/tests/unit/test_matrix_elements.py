"""
Unit tests for ripple and transverse-coordinate matrix elements.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from arnold_waveguide.errors import DomainError
from arnold_waveguide.physics.matrix_elements import (
    quadrature_matrix_element,
    ripple_elements,
    ripple_matrix_element,
    validate_first_order_hamiltonian,
    y_elements,
    y_matrix_element,
)


K, A, D = 0.1, 0.01, math.pi

modes = st.integers(1, 60)
harmonics = st.integers(-60, 60)


class TestRippleMatrixElement:
    def test_reference_diagonal_in_m(self):
        """⟨401,400|Û|400,400⟩ = -a/(2d)·π²m²/d² at n0 = m0 = 400."""
        value = ripple_matrix_element(400, 400, 401, 400, K, A, D)
        assert value == pytest.approx(-A / (2 * D) * 400**2, rel=1e-12)
        assert value == pytest.approx(-254.648, abs=1e-3)

    @pytest.mark.parametrize("n_p", [400, 402, 398])
    def test_forbidden_harmonics(self, n_p):
        assert ripple_matrix_element(400, 5, n_p, 6, K, A, D) == 0.0

    def test_mixing_sign(self):
        # m + m' odd, n' = n + 1
        expected = -A / (2 * D) * (-1.0) * 2 * 3 / (4 - 9) * (1 + 2 * (K + 5))
        assert ripple_matrix_element(5, 2, 6, 3, K, A, D) == pytest.approx(expected)

    def test_zero_amplitude(self):
        assert ripple_matrix_element(3, 2, 4, 5, K, 0.0, D) == 0.0

    def test_rejects_mode_zero(self):
        with pytest.raises(DomainError):
            ripple_matrix_element(0, 0, 1, 1, K, A, D)

    @given(n=harmonics, m=modes, m_p=modes)
    def test_hermitian_pair(self, n, m, m_p):
        """⟨n+1,m'|Û|n,m⟩ equals ⟨n,m|Û|n+1,m'⟩."""
        forward = ripple_matrix_element(n, m, n + 1, m_p, K, A, D)
        backward = ripple_matrix_element(n + 1, m_p, n, m, K, A, D)
        assert forward == pytest.approx(backward, rel=1e-12, abs=1e-15)

    @given(n=harmonics, m=modes, dn=st.sampled_from([-1, 0, 1, 2]), m_p=modes)
    def test_vectorized_matches_scalar(self, n, m, dn, m_p):
        vector = ripple_elements(np.array([n]), np.array([m]), np.array([n + dn]), np.array([m_p]), K, A, D)
        assert vector[0] == pytest.approx(ripple_matrix_element(n, m, n + dn, m_p, K, A, D), rel=1e-12, abs=1e-15)

    def test_vectorized_rejects_mode_zero(self):
        with pytest.raises(DomainError):
            ripple_elements(np.array([0]), np.array([0]), np.array([1]), np.array([1]), K, A, D)


class TestQuadratureOracle:
    @pytest.mark.parametrize("n,m,n_p,m_p", [(3, 2, 4, 2), (3, 2, 2, 2), (-4, 3, -3, 6), (5, 5, 4, 2), (0, 1, 1, 2)])
    def test_closed_form_matches_quadrature(self, n, m, n_p, m_p):
        closed = ripple_matrix_element(n, m, n_p, m_p, K, A, D)
        numeric = quadrature_matrix_element(n, m, n_p, m_p, K, A, D)
        assert numeric == pytest.approx(closed, rel=1e-6, abs=1e-9)

    def test_forbidden_is_zero_by_quadrature(self):
        assert abs(quadrature_matrix_element(3, 2, 5, 3, K, A, D)) < 1e-9

    def test_random_samples(self, make_params):
        params = make_params()
        assert validate_first_order_hamiltonian(params, sample_count=12, seed=3, index_limit=8) < 1e-6


class TestYMatrixElement:
    def test_diagonal(self):
        assert y_matrix_element(7, 7, D) == pytest.approx(D / 2)

    def test_same_parity_vanishes(self):
        assert y_matrix_element(1, 3, D) == 0.0

    @pytest.mark.parametrize("m,m_p", [(1, 2), (2, 5), (4, 7)])
    def test_against_quadrature(self, m, m_p):
        value, _ = integrate.quad(lambda y: 2 / D * y * math.sin(math.pi * m * y / D) * math.sin(math.pi * m_p * y / D), 0.0, D, epsabs=1e-13)
        assert y_matrix_element(m, m_p, D) == pytest.approx(value, abs=1e-10)

    @settings(max_examples=50)
    @given(m=modes, m_p=modes)
    def test_vectorized_and_symmetric(self, m, m_p):
        value = y_matrix_element(m, m_p, D)
        assert y_matrix_element(m_p, m, D) == value
        assert y_elements(np.array([m]), np.array([m_p]), D)[0] == pytest.approx(value, rel=1e-12, abs=1e-15)
