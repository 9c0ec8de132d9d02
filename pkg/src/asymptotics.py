"""
Large-n limit objects: polylogarithm and Lerch series, the shape function ell,
the constants K_H, C(H), M(H), and the H=0 limit density.

With s = -1 - 2H and t = -2H, ell is defined for |x| > 1 by

    ell(x) = 1 - (1+x)^2 [(x-1) Li_s(1/x) - (1+x) Li_t(1/x)]^2 / (4 x^2 Li_t(1/x)^2)

and (x^2 - 1)^2 delta/alpha^2 tends to ell(1/x) inside the unit interval.
"""

import logging
import math
from typing import Iterable, List

import mpmath
import numpy as np
from scipy.integrate import quad

from src.models import AsymptoticConstants, CoefficientModel, EllSample, RegionSpec

logger = logging.getLogger(__name__)

# Series are summed only up to |z| = 1/1.001, the image of |x| = 1.001
MAX_ABS_Z = 1.0 / 1.001
MIN_ABS_X_OUTSIDE = 1.001
MIN_ABS_X_INSIDE = 0.001
SINGULAR_GUARD = 1e-9
DEFAULT_SERIES_TOL = 1e-12

_BLOCK = 4096
_MAX_TERMS = 10_000_000

H0_POSITIVE_LIMIT = float(mpmath.mpf(1) / 3 - mpmath.log(2 - mpmath.sqrt(3)) / mpmath.pi)
# Mass of the two O(1/n) layers around x = 1 in the H=0 model; the pointwise limit misses it
H0_BOUNDARY_MASS = 0.5


def _check_z(z: float) -> None:
    if not abs(z) <= MAX_ABS_Z:
        raise ValueError(f"Series evaluation needs |z| <= {MAX_ABS_Z:.6f}, got z={z}")


def _check_h(h: float) -> None:
    if not 0.0 < h < 1.0:
        raise ValueError(f"Hurst index must be strictly between 0 and 1, got {h}")


def _tail_bounded_series(z: float, p: float, a: float, tol: float) -> float:
    """
    sum_{k>=0} z^k (k+a)^p for p >= 0, summed in blocks until the remaining
    tail is provably below tol.

    Term ratios ((k+1+a)/(k+a))^p |z| decrease in k, so once the ratio rho at
    the next index K is below 1 the tail is at most T_K / (1 - rho).
    """
    if z == 0.0:
        return a ** p
    abs_z = abs(z)
    log_abs_z = math.log(abs_z)
    partials = []
    start = 0
    while True:
        k = np.arange(start, start + _BLOCK)
        terms = np.power(z, k) * (k + a) ** p
        partials.append(math.fsum(terms.tolist()))
        start += _BLOCK

        nxt = start + a
        rho = ((nxt + 1.0) / nxt) ** p * abs_z
        if rho < 1.0:
            log_term = start * log_abs_z + p * math.log(nxt)
            if log_term < math.log(tol * (1.0 - rho)):
                break
        if start >= _MAX_TERMS:
            raise RuntimeError(f"Series did not reach tol={tol} within {_MAX_TERMS} terms (z={z}, p={p})")
    return math.fsum(partials)


def lerch_phi(z: float, s: float, a: float, tol: float = DEFAULT_SERIES_TOL) -> float:
    """
    Lerch transcendent Phi(z, s, a) = sum_{k>=0} z^k / (k+a)^s.

    Args:
        z: Argument with |z| <= 1/1.001
        s: Order, s <= 0
        a: Shift, a > 0
        tol: Bound on the neglected tail

    Returns:
        Series value
    """
    _check_z(z)
    if s > 0:
        raise ValueError(f"Only orders s <= 0 are supported, got {s}")
    if a <= 0:
        raise ValueError(f"Shift a must be positive, got {a}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    return _tail_bounded_series(z, -s, a, tol)


def polylog(s: float, z: float, tol: float = DEFAULT_SERIES_TOL) -> float:
    """Polylogarithm Li_s(z) = sum_{k>=1} z^k / k^s for s <= 0 and |z| <= 1/1.001."""
    _check_z(z)
    if s > 0:
        raise ValueError(f"Only orders s <= 0 are supported, got {s}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    if z == 0.0:
        return 0.0
    return z * _tail_bounded_series(z, -s, 1.0, tol / abs(z))


def ell(x: float, h: float) -> float:
    """
    Limit shape ell(x) for |x| >= 1.001, clipped to [0, 1].

    Example:
        >>> ell(2.0, 0.5)
        1.0
    """
    _check_h(h)
    if not abs(x) >= MIN_ABS_X_OUTSIDE:
        raise ValueError(f"ell is evaluated by series only for |x| >= {MIN_ABS_X_OUTSIDE}, got x={x}")
    z = 1.0 / x
    tol = 1e-17 * abs(z)
    li_s = polylog(-1.0 - 2.0 * h, z, tol)
    li_t = polylog(-2.0 * h, z, tol)
    ratio = (1.0 + x) ** 2 * ((x - 1.0) * li_s - (1.0 + x) * li_t) ** 2 / (4.0 * x * x * li_t * li_t)
    return min(1.0, max(0.0, 1.0 - ratio))


def ell_inside(x: float, h: float) -> float:
    """
    ell(1/x) for 0.001 <= |x| <= 0.999 from the interior moment ratios.

    As n grows, alpha, beta and gamma approach their H=1/2 values times
    (1 + B1), (1 + A1) and (1 + C1), each a polylog expression at x.
    """
    _check_h(h)
    if not MIN_ABS_X_INSIDE <= abs(x) <= 1.0 / MIN_ABS_X_OUTSIDE + 1e-15:
        raise ValueError(f"ell_inside needs {MIN_ABS_X_INSIDE} <= |x| <= 0.999, got x={x}")
    tol = 1e-16 * abs(x) ** 3
    li_s = polylog(-1.0 - 2.0 * h, x, tol)
    li_t = polylog(-2.0 * h, x, tol)

    xm1 = x - 1.0
    a1 = -(xm1 ** 3 * (1.0 + x) * li_s + x * (1.0 + x * x + 2.0 * xm1 ** 2 * li_t)) / (x + x ** 3)
    b1 = -1.0 + (-2.0 + 1.0 / x + x) * li_t
    c1 = (-2.0 * x ** 3 - xm1 ** 3 * (1.0 + x) * li_s + xm1 ** 2 * (-1.0 - 2.0 * x + x * x) * li_t) / (2.0 * x ** 3)
    return (x * x + 1.0) * (1.0 + a1) / (1.0 + b1) - x * x * ((1.0 + c1) / (1.0 + b1)) ** 2


def lag_sum(z: float, m: int, h: float, tol: float = 1e-15) -> float:
    """
    sum_{L=1}^{m} g(L, H) z^L through its polylog/Lerch representation.

    The infinite sum is (1-z)^2/(2z) Li_t(z) - 1/2; the part beyond m is
    z^{m+1} [-Phi(z,t,m+1) + Phi(z,t,m+2)/2 + Phi(z,t,m)/2].
    """
    _check_h(h)
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    if z == 0.0:
        return 0.0
    t = -2.0 * h
    infinite = (1.0 - z) ** 2 / (2.0 * z) * polylog(t, z, tol) - 0.5
    tail = z ** (m + 1) * (
        -lerch_phi(z, t, m + 1, tol) + 0.5 * lerch_phi(z, t, m + 2, tol) + 0.5 * lerch_phi(z, t, m, tol)
    )
    return infinite - tail


def limit_density(x: float, h: float) -> float:
    """n -> infinity envelope of sqrt(delta)/alpha away from +/-1 and 0."""
    if abs(x) >= MIN_ABS_X_OUTSIDE:
        return math.sqrt(ell(x, h)) / abs(x * x - 1.0)
    return math.sqrt(max(0.0, ell_inside(x, h))) / (1.0 - x * x)


def ell_table(h: float, points: Iterable[float]) -> List[EllSample]:
    """ell and the limit density on requested points (|x| < 1 reported as ell(1/x))."""
    table = []
    for x in points:
        value = ell(x, h) if abs(x) >= MIN_ABS_X_OUTSIDE else ell_inside(x, h)
        table.append(EllSample(x=x, ell=value, density=limit_density(x, h)))
    return table


def constants(h: float) -> AsymptoticConstants:
    """
    Limit constants for Hurst index h.

    Returns:
        k_h = (1 + 2 sqrt(h(1-h)))/pi, c_h = sqrt(4h(1-h)),
        m_h = (2^{-2(1+s+t)} (2^t - 2^s)(2^s - 2^t + 2^{2+s+t}))^{1/2}
    """
    _check_h(h)
    s = -1.0 - 2.0 * h
    t = -2.0 * h
    m_squared = 2.0 ** (-2.0 * (1.0 + s + t)) * (2.0 ** t - 2.0 ** s) * (2.0 ** s - 2.0 ** t + 2.0 ** (2.0 + s + t))
    return AsymptoticConstants(
        k_h=(1.0 + 2.0 * math.sqrt(h * (1.0 - h))) / math.pi,
        c_h=math.sqrt(4.0 * h * (1.0 - h)),
        m_h=math.sqrt(m_squared),
        h0_positive_limit=H0_POSITIVE_LIMIT,
        h0_boundary_mass=H0_BOUNDARY_MASS,
    )


def h0_limit_integrand(x: float) -> float:
    """Pointwise n -> infinity limit of the H=0 density."""
    if abs(x - 1.0) <= SINGULAR_GUARD or abs(x + 1.0) <= SINGULAR_GUARD:
        raise ValueError(f"H=0 limit density is singular at x={x}")
    if abs(x) < 1.0:
        return math.sqrt((3.0 + x) / (1.0 - x)) / (2.0 + 2.0 * x)
    return math.sqrt((1.0 + 3.0 * x) / (x - 1.0)) / (2.0 * x + 2.0 * x * x)


def h0_limit_integral() -> float:
    """
    Integral of h0_limit_integrand over [0, inf), equal to pi/3 - log(2 - sqrt(3)).

    (1, inf) mirrors (0, 1); on (0, 1) the substitution x = 1 - u^2 removes
    the inverse square-root singularity at 1.
    """
    value, _ = quad(lambda u: math.sqrt(4.0 - u * u) / (2.0 - u * u), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 2.0 * value


def leading_order(n: int, model: CoefficientModel, region: RegionSpec, boundary_correction: bool = False) -> float:
    """
    Asymptotic expected zero count for a region.

    FractionalIncrement: 2 sqrt(h(1-h)) log(n)/pi on the positive axis and
    log(n)/pi on the negative axis. LimitZero: the H=0 positive constant
    (plus the boundary-layer mass when requested) and log(n)/pi. Half-axis
    regions get half their axis, All the sum of both.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    log_n = math.log(n)
    negative = log_n / math.pi
    if model.is_limit_zero:
        positive = H0_POSITIVE_LIMIT + (H0_BOUNDARY_MASS if boundary_correction else 0.0)
    else:
        positive = 2.0 * math.sqrt(model.h * (1.0 - model.h)) * log_n / math.pi

    region = RegionSpec(region)
    if region == RegionSpec.ALL:
        return positive + negative
    if region == RegionSpec.POSITIVE_AXIS:
        return positive
    if region == RegionSpec.NEGATIVE_AXIS:
        return negative
    if region in (RegionSpec.ZERO_TO_ONE, RegionSpec.ONE_TO_INF):
        return positive / 2.0
    return negative / 2.0
