"""
Matrix elements of the first-order ripple operator and of the transverse coordinate
between flat-channel states.

In flattened coordinates y' = y/(1 + ε cos x) the ripple enters as

    Û = (ε/2)(2 cos x ∂²_y - 2y sin x ∂²_xy - y cos x ∂_y - ½ cos x - sin x ∂_x),

which only couples n' = n ± 1. The closed forms below are checked against direct
quadrature of Û by `validate_first_order_hamiltonian`.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from arnold_waveguide.errors import DomainError
from arnold_waveguide.init import logger
from arnold_waveguide.models import ModelParams


ORACLE_INDEX_LIMIT = 20
ORACLE_X_POINTS = 64
ORACLE_EPSABS = 1e-12


def _check_modes(*modes: int) -> None:
    for m in modes:
        if m < 1:
            raise DomainError(f"Transverse mode m={m} is outside the domain m >= 1")


def ripple_matrix_element(n: int, m: int, n_p: int, m_p: int, k: float, a: float, d: float) -> float:
    """
    ⟨n', m'|Û|n, m⟩ of the first-order ripple operator.

    The diagonal-in-m term applies only for m = m', the mode-mixing term only for m ≠ m'.

    Args:
        n, m: Source state
        n_p, m_p: Target state
        k: Bloch number
        a: Ripple amplitude
        d: Channel width

    Returns:
        Real matrix element; exactly 0 unless n' = n ± 1

    Raises:
        DomainError: If m or m' is below 1
    """
    _check_modes(m, m_p)
    if n_p == n + 1:
        sign = 1.0
    elif n_p == n - 1:
        sign = -1.0
    else:
        return 0.0

    prefactor = -a / (2.0 * d)
    if m == m_p:
        return prefactor * math.pi**2 * m**2 / d**2
    parity = -1.0 if (m + m_p) % 2 else 1.0
    return prefactor * parity * m * m_p / (m**2 - m_p**2) * (1.0 + sign * 2.0 * (k + n))


def ripple_elements(n: np.ndarray, m: np.ndarray, n_p: np.ndarray, m_p: np.ndarray, k: float, a: float, d: float) -> np.ndarray:
    """
    Vectorized `ripple_matrix_element` over broadcastable index arrays.

    Raises:
        DomainError: If any mode index is below 1
    """
    n, m, n_p, m_p = np.broadcast_arrays(*(np.asarray(v, dtype=np.int64) for v in (n, m, n_p, m_p)))
    if m.size and (m.min() < 1 or m_p.min() < 1):
        raise DomainError("Transverse mode index below 1 in ripple matrix element request")

    up = n_p == n + 1
    down = n_p == n - 1
    same_m = m == m_p

    mf = m.astype(float)
    mpf = m_p.astype(float)
    parity = np.where((m + m_p) % 2 == 1, -1.0, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        mixing = parity * mf * mpf / (mf**2 - mpf**2)
    sign = np.where(up, 1.0, -1.0)
    mixing = mixing * (1.0 + sign * 2.0 * (k + n))

    diagonal = math.pi**2 * mf**2 / d**2
    values = np.where(same_m, diagonal, mixing) * (-a / (2.0 * d))
    return np.where(up | down, values, 0.0)


def y_matrix_element(m: int, m_p: int, d: float) -> float:
    """
    ∫₀^d (2/d)·y·sin(πmy/d)·sin(πm'y/d) dy.

    Returns:
        d/2 for m = m', -8dmm'/(π²(m²-m'²)²) for m+m' odd, otherwise 0

    Raises:
        DomainError: If m or m' is below 1
    """
    _check_modes(m, m_p)
    if m == m_p:
        return d / 2.0
    if (m + m_p) % 2 == 0:
        return 0.0
    return -8.0 * d * m * m_p / (math.pi**2 * (m**2 - m_p**2) ** 2)


def y_elements(m: np.ndarray, m_p: np.ndarray, d: float) -> np.ndarray:
    """Vectorized `y_matrix_element` over broadcastable mode arrays."""
    m, m_p = np.broadcast_arrays(np.asarray(m, dtype=np.int64), np.asarray(m_p, dtype=np.int64))
    if m.size and (m.min() < 1 or m_p.min() < 1):
        raise DomainError("Transverse mode index below 1 in y matrix element request")
    mf = m.astype(float)
    mpf = m_p.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        odd = -8.0 * d * mf * mpf / (math.pi**2 * (mf**2 - mpf**2) ** 2)
    values = np.where((m + m_p) % 2 == 1, odd, 0.0)
    return np.where(m == m_p, d / 2.0, values)


def quadrature_matrix_element(n: int, m: int, n_p: int, m_p: int, k: float, a: float, d: float) -> float:
    """
    ⟨n', m'|Û|n, m⟩ by direct integration of Û applied to the flat-channel state.

    The x-average uses a periodic trapezoid rule, exact for the trigonometric
    polynomials involved; the y-integral uses adaptive quadrature.

    Returns:
        Real part of the matrix element; the imaginary part vanishes analytically
    """
    _check_modes(m, m_p)
    eps = a / d
    if eps == 0.0:
        return 0.0

    big_k = k + n
    mu = math.pi * m / d
    mu_p = math.pi * m_p / d
    x = np.linspace(0.0, 2.0 * math.pi, ORACLE_X_POINTS, endpoint=False)
    phase = np.exp(1j * (n - n_p) * x)
    cos_x, sin_x = np.cos(x), np.sin(x)

    def integrand(y: float) -> complex:
        s, c = math.sin(mu * y), math.cos(mu * y)
        bracket = -2.0 * mu**2 * cos_x * s - 2j * big_k * mu * y * sin_x * c - mu * y * cos_x * c - 0.5 * cos_x * s - 1j * big_k * sin_x * s
        return complex(np.mean(phase * bracket)) * math.sin(mu_p * y)

    limit = 50 + 10 * (m + m_p)
    real, _ = integrate.quad(lambda y: integrand(y).real, 0.0, d, epsabs=ORACLE_EPSABS, epsrel=1e-12, limit=limit)
    imag, _ = integrate.quad(lambda y: integrand(y).imag, 0.0, d, epsabs=ORACLE_EPSABS, epsrel=1e-12, limit=limit)
    if abs(imag) > 1e-8 * max(1.0, abs(real)):
        logger.warning("Quadrature matrix element (%d,%d)->(%d,%d) has imaginary part %.3g", n, m, n_p, m_p, imag)
    return (eps / 2.0) * (2.0 / d) * real


def validate_first_order_hamiltonian(params: ModelParams, sample_count: int, seed: int = 0, index_limit: int = ORACLE_INDEX_LIMIT) -> float:
    """
    Compare closed-form ripple matrix elements with direct quadrature on random index pairs.

    Most samples use n' = n ± 1; one in four checks a forbidden n' (n or n + 2),
    where both methods must give zero.

    Args:
        params: Model parameters; uses d, a and k
        sample_count: Number of random (n, m, n', m') samples
        seed: Seed for the sample generator
        index_limit: Bound on |n| and m

    Returns:
        Maximum relative error; errors are measured against max(|closed form|, ε)
    """
    rng = np.random.default_rng(seed)
    eps = params.epsilon
    max_error = 0.0
    for _ in range(sample_count):
        n = int(rng.integers(-index_limit, index_limit + 1))
        m = int(rng.integers(1, index_limit + 1))
        m_p = int(rng.integers(1, index_limit + 1))
        roll = rng.random()
        if roll < 0.125:
            n_p = n
        elif roll < 0.25:
            n_p = n + 2
        else:
            n_p = n + (1 if rng.random() < 0.5 else -1)

        closed = ripple_matrix_element(n, m, n_p, m_p, params.k, params.a, params.d)
        numeric = quadrature_matrix_element(n, m, n_p, m_p, params.k, params.a, params.d)
        scale = max(abs(closed), eps)
        error = abs(closed - numeric) / scale if scale > 0 else abs(closed - numeric)
        max_error = max(max_error, error)

    logger.info("First-order Hamiltonian check: %d samples, max relative error %.3g", sample_count, max_error)
    return max_error
