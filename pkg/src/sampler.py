"""
Reproducible draws of coefficient vectors.

Each trial gets its own counter-based Philox stream keyed by (seed, trial_index),
so trials can be generated in any order and on any number of threads.
"""

import logging
import math
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigvalsh

from src.covariance import covariance_matrix, lag_covariances
from src.models import CoefficientModel, CoefficientSample, SamplingMethod

logger = logging.getLogger(__name__)

# Smallest eigenvalue tolerated before the covariance is declared broken
PIVOT_TOLERANCE = -1e-10
# Most negative circulant eigenvalue accepted (clipped to zero)
SPECTRAL_TOLERANCE = -1e-8
# Diagonal jitter added when an exactly-singular but valid covariance fails Cholesky
JITTER = 1e-10


class SamplingError(RuntimeError):
    """The covariance could not be factored; indicates a covariance bug."""
    pass


def trial_generator(seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator for one trial."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial_index])))


@lru_cache(maxsize=32)
def cholesky_factor(n: int, model: CoefficientModel) -> np.ndarray:
    """Lower Cholesky factor of covariance_matrix(n, model), cached per (n, model)."""
    cov = covariance_matrix(n, model).entries
    try:
        factor = cholesky(cov, lower=True)
    except LinAlgError:
        smallest = float(eigvalsh(cov, subset_by_index=[0, 0])[0])
        if smallest < PIVOT_TOLERANCE:
            raise SamplingError(
                f"Covariance for n={n}, {model.descriptor} is not positive semidefinite "
                f"(smallest eigenvalue {smallest:.3e})"
            )
        logger.warning(f"Cholesky needed jitter for n={n}, {model.descriptor} (smallest eigenvalue {smallest:.3e})")
        factor = cholesky(cov + JITTER * np.eye(n), lower=True)
    factor.setflags(write=False)
    return factor


@lru_cache(maxsize=32)
def circulant_sqrt_eigenvalues(n: int, model: CoefficientModel) -> Tuple[np.ndarray, bool]:
    """
    Square roots of the eigenvalues of the 2n circulant embedding, in rfft layout.

    First row of the circulant: [g(0), ..., g(n-1), g(n), g(n-1), ..., g(1)].

    Returns:
        (sqrt eigenvalues of length n+1, ok flag). ok is False when an
        eigenvalue falls below SPECTRAL_TOLERANCE.
    """
    gamma = lag_covariances(n + 1, model)
    row = np.concatenate([gamma[:n], gamma[n:n + 1], gamma[1:n][::-1]])
    eigenvalues = np.fft.rfft(row).real
    ok = bool(eigenvalues.min() >= SPECTRAL_TOLERANCE)
    root = np.sqrt(np.maximum(eigenvalues, 0.0))
    root.setflags(write=False)
    return root, ok


def _circulant_draw(n: int, sqrt_eig: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Hermitian noise in the frequency domain, transformed back with irfft."""
    size = 2 * n
    z = np.empty(n + 1, dtype=np.complex128)
    z[0] = rng.standard_normal()
    z[n] = rng.standard_normal()
    if n > 1:
        z[1:n] = (rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)) / math.sqrt(2.0)
    z *= sqrt_eig * math.sqrt(size)
    return np.fft.irfft(z, n=size)[:n]


def sample(
    n: int,
    model: CoefficientModel,
    seed: int,
    trial_index: int,
    method: SamplingMethod = SamplingMethod.CHOLESKY,
) -> CoefficientSample:
    """
    Draw (a_0, ..., a_{n-1}) with covariance covariance_matrix(n, model).

    Args:
        n: Polynomial length
        model: Coefficient law
        seed: Experiment seed
        trial_index: Trial number within the experiment
        method: Cholesky (default) or circulant embedding (FractionalIncrement only)

    Returns:
        CoefficientSample; `fallback` is set when circulant embedding was
        rejected and the draw came from Cholesky instead.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = trial_generator(seed, trial_index)

    if method == SamplingMethod.CIRCULANT:
        if model.is_limit_zero:
            raise ValueError("Circulant embedding is only offered for FractionalIncrement models")
        sqrt_eig, ok = circulant_sqrt_eigenvalues(n, model)
        if ok:
            coeffs = _circulant_draw(n, sqrt_eig, rng)
            return CoefficientSample(coeffs=coeffs, model=model, seed=seed, trial_index=trial_index, method=method)
        logger.warning(f"Circulant embedding has negative spectrum for n={n}, {model.descriptor}; using Cholesky")
        coeffs = cholesky_factor(n, model) @ rng.standard_normal(n)
        return CoefficientSample(
            coeffs=coeffs, model=model, seed=seed, trial_index=trial_index,
            method=SamplingMethod.CHOLESKY, fallback=True,
        )

    coeffs = cholesky_factor(n, model) @ rng.standard_normal(n)
    return CoefficientSample(coeffs=coeffs, model=model, seed=seed, trial_index=trial_index, method=method)


def sample_matrix(
    n: int,
    model: CoefficientModel,
    seed: int,
    trials: int,
    start: int = 0,
    method: SamplingMethod = SamplingMethod.CHOLESKY,
) -> np.ndarray:
    """Rows are sample(n, model, seed, start + t).coeffs for t < trials."""
    out = np.empty((trials, n))
    for t in range(trials):
        out[t] = sample(n, model, seed, start + t, method).coeffs
    return out


def sample_limit_zero_explicit(n: int, seed: int, trial_index: int) -> CoefficientSample:
    """
    H=0 limit coefficients built directly from n+1 independent normals.

    X(k) = (Z_0 + Z_k)/sqrt(2) for k = 1..n has unit variance and pairwise
    covariance 1/2; a_0 = X(1) and a_k = X(k+1) - X(k).
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    z = trial_generator(seed, trial_index).standard_normal(n + 1)
    x = (z[0] + z[1:]) / math.sqrt(2.0)
    coeffs = np.empty(n)
    coeffs[0] = x[0]
    coeffs[1:] = np.diff(x)
    return CoefficientSample(coeffs=coeffs, model=CoefficientModel.limit_zero(), seed=seed, trial_index=trial_index)
