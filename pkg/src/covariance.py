"""
Covariance of the polynomial coefficients.

Coefficients are the increments a_k = X(k+1) - X(k) of a fractional Brownian
motion with Hurst index H, whose lag covariance is

    g(L, H) = -L^{2H} + (L+1)^{2H}/2 + |L-1|^{2H}/2

or, for the H=0 limit law, the tridiagonal sequence 1, -1/2, 0, 0, ...
"""

from functools import lru_cache

import numpy as np
from scipy.linalg import toeplitz

from src.models import CoefficientModel, CovarianceMatrix


def increment_covariance(lag: int, model: CoefficientModel) -> float:
    """
    Covariance of two coefficients `lag` positions apart.

    Args:
        lag: Nonnegative index distance |i - j|
        model: Coefficient law

    Returns:
        cov(a_i, a_j), always in [-1, 1]

    Example:
        >>> increment_covariance(1, CoefficientModel.limit_zero())
        -0.5
    """
    if lag < 0:
        raise ValueError(f"lag must be nonnegative, got {lag}")
    if lag == 0:
        return 1.0
    if model.is_limit_zero:
        return -0.5 if lag == 1 else 0.0

    two_h = 2.0 * model.h
    return -(lag ** two_h) + 0.5 * (lag + 1) ** two_h + 0.5 * abs(lag - 1) ** two_h


@lru_cache(maxsize=64)
def lag_covariances(n: int, model: CoefficientModel) -> np.ndarray:
    """
    First row of the covariance matrix, g(0..n-1), as a read-only array.

    Cached per (n, model) because every moment evaluation needs it.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")

    if model.is_limit_zero:
        row = np.zeros(n)
        row[0] = 1.0
        if n > 1:
            row[1] = -0.5
    else:
        lags = np.arange(n, dtype=float)
        two_h = 2.0 * model.h
        row = -(lags ** two_h) + 0.5 * (lags + 1.0) ** two_h + 0.5 * np.abs(lags - 1.0) ** two_h
        row[0] = 1.0

    row.setflags(write=False)
    return row


def covariance_matrix(n: int, model: CoefficientModel) -> CovarianceMatrix:
    """Dense n x n Toeplitz covariance with entry (i, j) = g(|i - j|)."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    return CovarianceMatrix(n=n, entries=toeplitz(lag_covariances(n, model)))
