"""
Linear fits shared by the quantum and classical diffusion estimates.

The diffusion coefficient is D = d(Var E)/dt in dimensionless time on both sides.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from arnold_waveguide.errors import FitError


MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class LinearFit:
    slope: float
    slope_error: float
    intercept: float
    n_samples: int


def fit_slope(t: np.ndarray, y: np.ndarray) -> LinearFit:
    """
    Least-squares line through (t, y).

    Raises:
        FitError: If fewer than 10 samples are given or t is constant
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < MIN_FIT_SAMPLES:
        raise FitError(f"Need at least {MIN_FIT_SAMPLES} samples for a diffusion fit, got {t.size}")
    if np.ptp(t) == 0:
        raise FitError("Fit abscissa is constant")
    result = stats.linregress(t, y)
    return LinearFit(slope=float(result.slope), slope_error=float(result.stderr), intercept=float(result.intercept), n_samples=int(t.size))


def fit_in_window(t: np.ndarray, y: np.ndarray, window: tuple[float, float]) -> LinearFit:
    """`fit_slope` restricted to window[0] ≤ t ≤ window[1]."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (t >= window[0]) & (t <= window[1])
    return fit_slope(t[mask], y[mask])


def fit_classical_diffusion(times: np.ndarray, variance: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    """
    D_cl as the slope of Var E against time inside a time window.

    Args:
        times: Sample times
        variance: Ensemble energy variance at each time
        window: (t_start, t_end) in dimensionless time

    Returns:
        (D_cl, slope_error)

    Raises:
        FitError: If fewer than 10 samples fall inside the window
    """
    fit = fit_in_window(times, variance, window)
    return fit.slope, fit.slope_error
