"""
Real-root counting for realized polynomials.

Primary method: eigenvalues of the balanced companion matrix. Cross-check:
sign changes of the polynomial along a path covering the whole half-line,
evaluated with compensated Horner and refined around ambiguous cells. The
path runs x = t for t in [0, 1] and then x = 1/u for u from 1 down to 0,
using the reversed polynomial so nothing is evaluated beyond |x| = 1.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import companion, eigvals, matrix_balance

from src.models import CountMethod, RootCountConfig, ZeroCount

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
TRIM_RATIO = 1e-300
ZERO_ROOT_TOL = 1e-12

# Grid density: uniform points per unit length per degree, log-spaced points per decade near 1
_UNIFORM_PER_DEGREE = 8
_LOG_PER_DECADE = 20
_LOG_DECADES = 12
_SUBDIVISIONS = 8

_SPLITTER = 134217729.0  # 2^27 + 1


def _gamma(k: int) -> float:
    return k * EPS / (1.0 - k * EPS)


def _two_sum(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


def _split(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = a * b
    a_hi, a_lo = _split(a)
    b_hi, b_lo = _split(b)
    return p, a_lo * b_lo - (((p - a_hi * b_hi) - a_lo * b_hi) - a_hi * b_lo)


def horner(high_first: Sequence[float], x: np.ndarray) -> np.ndarray:
    """Plain Horner evaluation, coefficients highest degree first."""
    acc = np.full_like(x, high_first[0], dtype=float)
    for a in high_first[1:]:
        acc = acc * x + a
    return acc


def compensated_horner(high_first: Sequence[float], x: np.ndarray) -> np.ndarray:
    """Horner with error-free transformations; as accurate as twice the working precision."""
    s = np.full_like(x, high_first[0], dtype=float)
    correction = np.zeros_like(x, dtype=float)
    for a in high_first[1:]:
        p, p_err = _two_prod(s, x)
        s, s_err = _two_sum(p, a)
        correction = correction * x + (p_err + s_err)
    return s + correction


def _signs(high_first: np.ndarray, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Certified signs (0 where undecidable) and magnitudes of p at x."""
    degree = len(high_first) - 1
    magnitude_bound = horner(np.abs(high_first), np.abs(x))

    values = horner(high_first, x)
    signs = np.sign(values)
    unsure = np.abs(values) <= _gamma(2 * degree) * magnitude_bound
    if np.any(unsure):
        refined = compensated_horner(high_first, x[unsure])
        bound = EPS * np.abs(refined) + 2.0 * _gamma(2 * degree) ** 2 * magnitude_bound[unsure]
        values[unsure] = refined
        signs[unsure] = np.where(np.abs(refined) > bound, np.sign(refined), 0.0)
    return signs, np.abs(values)


def _divide_linear(low_first: List[float], root: float) -> List[float]:
    """Synthetic division by (x - root); exact for integer data and root = +/-1."""
    high = low_first[::-1]
    quotient = [high[0]]
    for a in high[1:-1]:
        quotient.append(a + root * quotient[-1])
    return quotient[::-1]


def _deflate_exact(low_first: List[float]) -> Tuple[List[float], int, int, int]:
    """Strip roots that are exactly 0, 1 or -1. Returns (coeffs, at_one, at_minus_one, at_zero)."""
    c = list(low_first)
    at_zero = 0
    while len(c) > 1 and c[0] == 0.0:
        c.pop(0)
        at_zero += 1
    at_one = 0
    while len(c) > 1 and math.fsum(c) == 0.0:
        c = _divide_linear(c, 1.0)
        at_one += 1
    at_minus_one = 0
    while len(c) > 1 and math.fsum(a if k % 2 == 0 else -a for k, a in enumerate(c)) == 0.0:
        c = _divide_linear(c, -1.0)
        at_minus_one += 1
    return c, at_one, at_minus_one, at_zero


def _count_eigen(low_first: List[float], imag_tol: float) -> Tuple[int, int, bool]:
    """(negative, positive, near_zero) from companion eigenvalues."""
    degree = len(low_first) - 1
    if degree == 0:
        return 0, 0, False
    if degree == 1:
        roots = np.array([-low_first[0] / low_first[1]], dtype=complex)
    else:
        balanced, _ = matrix_balance(companion(low_first[::-1]), permute=True, scale=True)
        roots = eigvals(balanced, overwrite_a=True, check_finite=False)

    real = roots.real[np.abs(roots.imag) <= imag_tol * (1.0 + np.abs(roots.real))]
    near_zero = np.abs(real) < ZERO_ROOT_TOL
    negative = int(np.count_nonzero(real < 0.0))
    positive = int(real.size - negative)
    return negative, positive, bool(np.any(near_zero))


def _path_grid(degree: int, u_min: float) -> np.ndarray:
    """Path parameters tau in [0, 2]: tau = t on [0, 1], tau = 2 - u beyond."""
    uniform = np.linspace(0.0, 1.0, _UNIFORM_PER_DEGREE * (degree + 1) + 1)
    near_one = 1.0 - 10.0 ** (-np.arange(1, _LOG_DECADES * _LOG_PER_DECADE + 1) / _LOG_PER_DECADE)
    inner = np.concatenate([uniform, near_one])
    outer_u = np.concatenate([np.linspace(u_min, 1.0, _UNIFORM_PER_DEGREE * (degree + 1) + 1), near_one])
    outer_u = outer_u[outer_u >= u_min]
    taus = np.concatenate([inner, 2.0 - outer_u, [2.0]])
    return np.unique(taus)


def _path_signs(low_first: np.ndarray, sigma: float, taus: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Signs of p along the path on the side sigma."""
    degree = len(low_first) - 1
    signs = np.empty_like(taus)
    mags = np.empty_like(taus)

    inner = taus <= 1.0
    if np.any(inner):
        signs[inner], mags[inner] = _signs(low_first[::-1], sigma * taus[inner])
    outer = ~inner
    if np.any(outer):
        # p(x) = x^d p_rev(1/x), and low-first p is high-first p_rev
        s, m = _signs(low_first, sigma * (2.0 - taus[outer]))
        signs[outer] = s * (sigma ** degree)
        mags[outer] = m
    return signs, mags


def _ambiguous_cells(signs: np.ndarray, mags: np.ndarray) -> np.ndarray:
    """Cells with an undecided endpoint, or flanking a dip of |p| that does not cross zero."""
    flagged = (signs[:-1] == 0.0) | (signs[1:] == 0.0)
    if signs.size >= 3:
        same = (signs[:-2] == signs[1:-1]) & (signs[1:-1] == signs[2:]) & (signs[1:-1] != 0.0)
        dip = same & (mags[1:-1] < mags[:-2]) & (mags[1:-1] < mags[2:])
        flagged[:-1] |= dip
        flagged[1:] |= dip
    return np.flatnonzero(flagged)


def _side_count(low_first: np.ndarray, sigma: float, u_min: float, grid_refine: int) -> Tuple[int, bool]:
    """Sign changes on one half-line; the flag is set if undecided points remain."""
    taus = _path_grid(len(low_first) - 1, u_min)
    signs, mags = _path_signs(low_first, sigma, taus)

    for _ in range(grid_refine):
        cells = _ambiguous_cells(signs, mags)
        if cells.size == 0:
            break
        fresh = np.concatenate([np.linspace(taus[i], taus[i + 1], _SUBDIVISIONS + 1)[1:-1] for i in cells])
        fresh_signs, fresh_mags = _path_signs(low_first, sigma, fresh)
        taus = np.concatenate([taus, fresh])
        order = np.argsort(taus, kind="stable")
        taus = taus[order]
        signs = np.concatenate([signs, fresh_signs])[order]
        mags = np.concatenate([mags, fresh_mags])[order]

    decided = signs[signs != 0.0]
    changes = int(np.count_nonzero(decided[1:] != decided[:-1]))
    return changes, bool(decided.size != signs.size)


def _count_sign_grid(low_first: List[float], grid_refine: int) -> Tuple[int, int, bool]:
    """(negative, positive, undecided) by sign changes on both half-lines."""
    degree = len(low_first) - 1
    if degree == 0:
        return 0, 0, False
    a = np.asarray(low_first, dtype=float)
    # Cauchy bound: every root has |x| < 1 + max|a_k| / |a_lead|
    bound = 1.0 + float(np.max(np.abs(a[:-1]))) / abs(a[-1])
    u_min = 1.0 / bound

    positive, pos_undecided = _side_count(a, 1.0, u_min, grid_refine)
    negative, neg_undecided = _side_count(a, -1.0, u_min, grid_refine)
    return negative, positive, pos_undecided or neg_undecided


def count_real_zeros(coeffs: Sequence[float], config: Optional[RootCountConfig] = None) -> ZeroCount:
    """
    Count real zeros of sum coeffs[k] x^k split by sign.

    Args:
        coeffs: Coefficients, lowest degree first
        config: imag_tol, grid_refine and whether to run the sign-grid cross-check

    Returns:
        ZeroCount. When the two methods disagree the sign-grid count is
        returned with suspect set. Roots at x = 0 count as positive and
        also set suspect.
    """
    config = config or RootCountConfig()
    a = np.asarray(coeffs, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("Polynomial must have at least one coefficient")
    if not np.all(np.isfinite(a)):
        raise ValueError("Polynomial coefficients must be finite")
    scale = float(np.max(np.abs(a)))
    if scale == 0.0:
        raise ValueError("The zero polynomial has no well-defined root count")
    if a.size == 1:
        return ZeroCount(negative=0, positive=0, total=0)

    keep = np.flatnonzero(np.abs(a) >= TRIM_RATIO * scale)
    a = a[:keep[-1] + 1]

    c, at_one, at_minus_one, at_zero = _deflate_exact(a.tolist())
    base_negative = at_minus_one
    base_positive = at_one + at_zero
    suspect = at_zero > 0

    eig_negative, eig_positive, near_zero = _count_eigen(c, config.imag_tol)
    suspect = suspect or near_zero

    if not config.cross_check:
        return ZeroCount(
            negative=base_negative + eig_negative,
            positive=base_positive + eig_positive,
            total=base_negative + base_positive + eig_negative + eig_positive,
            method=CountMethod.EIGEN,
            suspect=suspect,
        )

    grid_negative, grid_positive, _ = _count_sign_grid(c, config.grid_refine)
    if (grid_negative, grid_positive) != (eig_negative, eig_positive):
        logger.warning(
            f"Root count disagreement on degree {len(c) - 1}: eigen ({eig_negative}, {eig_positive}) "
            f"vs sign grid ({grid_negative}, {grid_positive})"
        )
        return ZeroCount(
            negative=base_negative + grid_negative,
            positive=base_positive + grid_positive,
            total=base_negative + base_positive + grid_negative + grid_positive,
            method=CountMethod.SIGN_GRID,
            suspect=True,
        )

    return ZeroCount(
        negative=base_negative + eig_negative,
        positive=base_positive + eig_positive,
        total=base_negative + base_positive + eig_negative + eig_positive,
        method=CountMethod.EIGEN,
        suspect=suspect,
    )
