"""
Kac-Rice moments and expected real-zero counts.

For P(x) = sum a_k x^k with coefficient covariance C:

    alpha = E[P(x)^2],  beta = E[P'(x)^2],  gamma = E[P(x) P'(x)],
    delta = alpha * beta - gamma^2

and the expected number of real zeros in a region is (1/pi) times the
integral of sqrt(delta)/alpha over it. Only |x| <= 1 is evaluated directly;
|x| > 1 goes through the reversal identity f(x) = f(1/x) / x^2.
"""

import logging
import math
import os
from typing import Callable, List, Tuple

import numpy as np
from dotenv import load_dotenv
from scipy.integrate import quad

from src.covariance import covariance_matrix, lag_covariances
from src.models import CoefficientModel, MomentTriple, QuadratureResult, RegionSpec

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_EVAL_BUDGET = int(os.getenv("KACZEROS_EVAL_BUDGET", "1000000"))
DEFAULT_TOL = 1e-8

# Cauchy-Schwarz slack, relative to alpha * beta
DELTA_CLAMP = 1e-12
DOMAIN_SLACK = 1e-12
BRUTEFORCE_MAX_N = 512
CLOSED_FORM_GUARD = 1e-6


class NumericalInvariantError(ArithmeticError):
    """Delta went negative beyond roundoff."""
    pass


class QuadratureBudgetError(RuntimeError):
    """Adaptive quadrature needed more integrand calls than allowed."""
    pass


def _check_point(x: float, n: int) -> None:
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if not abs(x) <= 1.0 + DOMAIN_SLACK:
        raise ValueError(f"Moments are evaluated directly only for |x| <= 1, got x={x}")


def _delta(alpha: float, beta: float, gamma: float) -> float:
    """alpha*beta - gamma^2, clamped to 0 inside the roundoff band."""
    delta = math.fsum([alpha * beta, -gamma * gamma])
    if delta < 0.0:
        if delta < -DELTA_CLAMP * alpha * beta:
            raise NumericalInvariantError(
                f"Delta={delta:.6e} violates Cauchy-Schwarz (alpha={alpha:.6e}, beta={beta:.6e}, gamma={gamma:.6e})"
            )
        return 0.0
    return delta


def _prefix_sums(y: float, count: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """P_k[m] = sum_{i<m} i^k y^i for k = 0, 1, 2 and m = 0..count."""
    idx = np.arange(count, dtype=float)
    powers = np.power(y, np.arange(count))
    zero = np.zeros(1)
    p0 = np.concatenate([zero, np.cumsum(powers)])
    p1 = np.concatenate([zero, np.cumsum(idx * powers)])
    p2 = np.concatenate([zero, np.cumsum(idx * idx * powers)])
    return p0, p1, p2


def _fast_sums(x: float, n: int, model: CoefficientModel) -> Tuple[float, float, float]:
    """alpha, beta, gamma in O(n) from prefix sums of y^i, i y^i, i^2 y^i with y = x^2."""
    p0, p1, p2 = _prefix_sums(x * x, n)

    alpha_terms = [float(p0[n])]
    beta_terms = [float(p2[n - 1] + 2.0 * p1[n - 1] + p0[n - 1])]
    gamma_terms = [x * float(p1[n - 1] + p0[n - 1])]

    if n > 1:
        r = lag_covariances(n, model)[1:]
        lags = np.arange(1, n)
        x_lag = np.power(x, lags)
        x_lag_minus_one = np.power(x, lags - 1)

        # pairs (i, i+L): n-L of them for alpha and gamma
        m = n - lags
        alpha_terms.extend((2.0 * r * x_lag * p0[m]).tolist())
        gamma_terms.extend((r * x_lag_minus_one * (2.0 * p1[m] + lags * p0[m])).tolist())

        # beta drops i = 0: n-1-L pairs with weight (m+1)(m+1+L)
        mb = n - 1 - lags
        inner = p2[mb] + (2.0 + lags) * p1[mb] + (1.0 + lags) * p0[mb]
        beta_terms.extend((2.0 * r * x_lag * inner).tolist())

    return math.fsum(alpha_terms), math.fsum(beta_terms), math.fsum(gamma_terms)


def moment_triple(x: float, n: int, model: CoefficientModel) -> MomentTriple:
    """
    Moments at |x| <= 1 in O(n) time.

    Args:
        x: Evaluation point, |x| <= 1
        n: Number of coefficients
        model: Coefficient law

    Returns:
        MomentTriple with delta clamped at 0 inside the roundoff band
    """
    _check_point(x, n)
    alpha, beta, gamma = _fast_sums(x, n, model)
    return MomentTriple(x=x, alpha=alpha, beta=beta, gamma=gamma, delta=_delta(alpha, beta, gamma))


def _double_sums(x: float, n: int, model: CoefficientModel) -> Tuple[float, float, float]:
    """Direct O(n^2) sums over covariance entries; no restriction on x."""
    cov = covariance_matrix(n, model).entries
    idx = np.arange(n)
    v = np.power(float(x), idx)
    dv = np.zeros(n)
    if n > 1:
        dv[1:] = idx[1:] * np.power(float(x), idx[1:] - 1)
    alpha = math.fsum((cov * np.outer(v, v)).ravel().tolist())
    beta = math.fsum((cov * np.outer(dv, dv)).ravel().tolist())
    gamma = math.fsum((cov * np.outer(v, dv)).ravel().tolist())
    return alpha, beta, gamma


def moment_triple_bruteforce(x: float, n: int, model: CoefficientModel) -> MomentTriple:
    """Ground-truth moments by double summation (n <= 512)."""
    _check_point(x, n)
    if n > BRUTEFORCE_MAX_N:
        raise ValueError(f"Brute-force moments are limited to n <= {BRUTEFORCE_MAX_N}, got {n}")
    alpha, beta, gamma = _double_sums(x, n, model)
    return MomentTriple(x=x, alpha=alpha, beta=beta, gamma=gamma, delta=_delta(alpha, beta, gamma))


def moments_h0_closed(x: float, n: int) -> MomentTriple:
    """Closed-form moments of the H=0 limit law, valid away from 0 and +/-1."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    for singular in (0.0, 1.0, -1.0):
        if abs(x - singular) <= CLOSED_FORM_GUARD:
            raise ValueError(f"Closed forms are singular near x={singular}, got x={x}")

    x2n = x ** (2 * n)
    alpha = (x + x2n) / (x + x * x)
    beta = -(
        x ** 3
        + (n - 1) * n * x2n
        + (n - 2) * n * x2n * x
        - (n - 1) * n * x2n * x * x
        - (n - 1) ** 2 * x2n * x ** 3
    ) / ((x - 1.0) * x ** 3 * (1.0 + x) ** 3)
    gamma = (-x * x + (2 * n - 1) * x2n + 2 * (n - 1) * x2n * x) / (2.0 * x * x * (1.0 + x) ** 2)
    return MomentTriple(x=x, alpha=alpha, beta=beta, gamma=gamma, delta=_delta(alpha, beta, gamma))


def kac_ratio_h_half(x: float, n: int) -> float:
    """Closed form of delta/alpha^2 for independent coefficients (H=1/2), |x| != 1."""
    if abs(abs(x) - 1.0) <= CLOSED_FORM_GUARD:
        raise ValueError(f"Closed form is singular near |x|=1, got x={x}")
    x2 = x * x
    x2n = x ** (2 * n)
    numerator = 1.0 + 2.0 * (n * n - 1) * x2n + x2n * x2n - n * n * x ** (2 * n - 2) - n * n * x2n * x2
    return numerator / ((x2 - 1.0) ** 2 * (x2n - 1.0) ** 2)


def integrand(x: float, n: int, model: CoefficientModel) -> float:
    """
    Kac-Rice density sqrt(delta)/alpha at any real x.

    Example:
        >>> integrand(0.0, 4, CoefficientModel.limit_zero())  # sqrt(3)/2
        0.8660254037844386
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if n == 1:
        return 0.0
    if abs(x) > 1.0:
        z = 1.0 / x
        return integrand(z, n, model) * z * z

    alpha, beta, gamma = _fast_sums(x, n, model)
    return math.sqrt(_delta(alpha, beta, gamma)) / alpha


def normalized_shape(x: float, n: int, model: CoefficientModel) -> float:
    """(x^2 - 1)^2 * delta/alpha^2; for |x| < 1 it tends to ell(1/x) as n grows."""
    return (x * x - 1.0) ** 2 * integrand(x, n, model) ** 2


def _half_breakpoints(n: int) -> List[float]:
    """Split points of (0, 1): 0, 1/2 and the geometric ladder 1 - 2^k/n."""
    points = {0.0, 0.5, 1.0}
    step = 1
    while step / n <= 0.5:
        points.add(1.0 - step / n)
        step *= 2
    return sorted(points)


class _CallBudget:
    """Counts integrand calls shared by all pieces of one expected_zeros call."""

    def __init__(self, limit: int):
        self.limit = limit
        self.calls = 0

    def wrap(self, f: Callable[[float], float]) -> Callable[[float], float]:
        def counted(t: float) -> float:
            self.calls += 1
            if self.calls > self.limit:
                raise QuadratureBudgetError(f"Quadrature exceeded its budget of {self.limit} integrand calls")
            return f(t)
        return counted


def _half_integral(n: int, model: CoefficientModel, sign: float, tol: float, budget: _CallBudget) -> Tuple[float, float]:
    """Integral of the density over (0, 1) (sign=+1) or (-1, 0) (sign=-1)."""
    points = _half_breakpoints(n)
    piece_tol = tol / (len(points) - 1)
    f = budget.wrap(lambda t: integrand(sign * t, n, model))

    values, errors = [], []
    for a, b in zip(points[:-1], points[1:]):
        out = quad(f, a, b, epsabs=piece_tol, epsrel=1e-11, limit=200, full_output=1)
        value, err = out[0], out[1]
        if len(out) > 3:
            logger.warning(f"Quadrature warning on [{sign * a}, {sign * b}] for n={n}, {model.descriptor}: {out[3]}")
        values.append(value)
        errors.append(err)
    return math.fsum(values), math.fsum(errors)


# (weight of the (0,1) integral, weight of the (-1,0) integral)
_REGION_WEIGHTS = {
    RegionSpec.ZERO_TO_ONE: (1, 0),
    RegionSpec.ONE_TO_INF: (1, 0),
    RegionSpec.POSITIVE_AXIS: (2, 0),
    RegionSpec.MINUS_ONE_TO_ZERO: (0, 1),
    RegionSpec.NEG_INF_TO_MINUS_ONE: (0, 1),
    RegionSpec.NEGATIVE_AXIS: (0, 2),
    RegionSpec.ALL: (2, 2),
}


def expected_zeros(
    n: int,
    model: CoefficientModel,
    region: RegionSpec = RegionSpec.ALL,
    tol: float = DEFAULT_TOL,
    eval_budget: int = DEFAULT_EVAL_BUDGET,
) -> QuadratureResult:
    """
    Expected number of real zeros of a length-n polynomial in a region.

    Tails beyond +/-1 are folded onto (-1, 0) and (0, 1) by the reversal
    identity, so only those two halves are integrated numerically.

    Args:
        n: Number of coefficients (degree n-1)
        model: Coefficient law
        region: Part of the real line to count in
        tol: Absolute tolerance on the integral before the 1/pi factor
        eval_budget: Maximum number of integrand calls

    Returns:
        QuadratureResult with value, error bound and call count

    Raises:
        QuadratureBudgetError: more than eval_budget integrand calls were needed
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")

    positive_weight, negative_weight = _REGION_WEIGHTS[RegionSpec(region)]
    total_weight = positive_weight + negative_weight
    budget = _CallBudget(eval_budget)

    integral, error = 0.0, 0.0
    for weight, sign in ((positive_weight, 1.0), (negative_weight, -1.0)):
        if weight == 0:
            continue
        value, err = _half_integral(n, model, sign, tol / total_weight, budget)
        integral += weight * value
        error += weight * err

    logger.debug(f"E_{n} {region} for {model.descriptor}: {integral / math.pi:.12f} ({budget.calls} calls)")
    return QuadratureResult(value=integral / math.pi, abs_err_estimate=error / math.pi, evaluations=budget.calls)
