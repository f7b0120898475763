"""
Special functions used by the rank-correlation formulas.

Standard normal pdf/cdf/quantile, Owen's T, the bivariate normal CDF built
from Owen's decomposition, the skew-normal CDF and the regularized incomplete
gamma function with its inverses. Every function accepts scalars or numpy
arrays (broadcasting like a ufunc) and returns a float for scalar input.
"""

import math
import logging

import numpy as np
from scipy import special

from config.copula_constants import GAUSS_LEGENDRE_NODES
from modules.errors import DomainError

logger = logging.getLogger(__name__)

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GAUSS_LEGENDRE_NODES)


def unwrap_scalar(values):
    """Return a Python float for 0-d results, the array otherwise."""
    if np.ndim(values) == 0:
        return float(values)
    return values


def norm_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return unwrap_scalar(_INV_SQRT_2PI * np.exp(-0.5 * x * x))


def norm_cdf(x):
    """Standard normal distribution function; accepts +/-inf."""
    return unwrap_scalar(special.ndtr(np.asarray(x, dtype=float)))


def norm_quantile(u):
    """
    Standard normal quantile function.

    Args:
        u: Probability (or array of probabilities) strictly inside (0, 1)

    Returns:
        x with norm_cdf(x) == u

    Raises:
        DomainError: if any u lies outside the open unit interval
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise DomainError(f"norm_quantile requires u in (0, 1), got {_first_bad(u, (u > 0.0) & (u < 1.0))}")
    return unwrap_scalar(special.ndtri(u))


def _first_bad(values, ok_mask):
    bad = np.asarray(values)[~np.asarray(ok_mask)]
    return bad.flat[0] if bad.size else None


def _owen_t_quadrature(h, a):
    """Owen's T for h >= 0 and 0 <= a <= 1 by Gauss-Legendre on [0, a]."""
    t = a[:, None] * (_GL_NODES + 1.0) * 0.5
    one_t2 = 1.0 + t * t
    integrand = np.exp(-0.5 * (h * h)[:, None] * one_t2) / one_t2
    return 0.5 * a * (integrand @ _GL_WEIGHTS) / (2.0 * math.pi)


def owen_t(h, a):
    """
    Owen's T function T(h, a) = (2 pi)^-1 * int_0^a exp(-h^2 (1+t^2)/2) / (1+t^2) dt.

    Uses 64-node Gauss-Legendre quadrature for |a| <= 1 and the reduction
    T(h, a) = [Phi(h) + Phi(ah)]/2 - Phi(h) Phi(ah) - T(ah, 1/a) above that.
    The result is exactly even in h and odd in a.

    Args:
        h: First argument (finite)
        a: Second argument (finite, or +/-inf for the limiting value)

    Returns:
        T(h, a)
    """
    h, a = np.broadcast_arrays(np.asarray(h, dtype=float), np.asarray(a, dtype=float))
    h_abs = np.abs(h).ravel()
    a_abs = np.abs(a).ravel()
    sign = np.sign(a).ravel()

    result = np.zeros(h_abs.shape)
    at_zero = h_abs == 0.0
    result[at_zero] = np.arctan(a_abs[at_zero]) / (2.0 * math.pi)

    small = ~at_zero & (a_abs <= 1.0)
    if np.any(small):
        result[small] = _owen_t_quadrature(h_abs[small], a_abs[small])

    large = ~at_zero & (a_abs > 1.0)
    if np.any(large):
        hl = h_abs[large]
        al = a_abs[large]
        ah = al * hl
        phi_h = special.ndtr(hl)
        phi_ah = special.ndtr(ah)
        result[large] = (0.5 * (phi_h + phi_ah) - phi_h * phi_ah
                         - _owen_t_quadrature(ah, 1.0 / al))

    return unwrap_scalar((sign * result).reshape(h.shape))


def _owen_argument(x, y, rho, s):
    """(y - rho x) / (x sqrt(1 - rho^2)) with the x -> 0+ limits filled in."""
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = (y - rho * x) / (x * s)
        limit = np.where(y == 0.0, (1.0 - rho) / s, np.sign(y) * np.inf)
    at_zero = x == 0.0
    return np.where(at_zero, limit, ratio)


def _bvn_owen(x, y, rho, owen=None):
    """Bivariate normal CDF for |rho| < 1 and finite arguments."""
    owen = owen or owen_t
    s = np.sqrt((1.0 - rho) * (1.0 + rho))
    product = x * y
    correction = 0.5 * ((product < 0.0) | ((product == 0.0) & ((x < 0.0) | (y < 0.0))))
    value = (0.5 * (special.ndtr(x) + special.ndtr(y)) - correction
             - np.asarray(owen(x, _owen_argument(x, y, rho, s)))
             - np.asarray(owen(y, _owen_argument(y, x, rho, s))))
    return np.clip(value, 0.0, 1.0)


def bvn_cdf(x1, x2, rho, owen=None):
    """
    Bivariate standard normal CDF Phi_2(x1, x2; rho).

    Assembled from Owen's T decomposition. Arguments on the axes use the
    limiting Owen arguments, |rho| = 1 short-circuits to the degenerate
    closed forms and infinite arguments to the marginal CDFs.

    Args:
        x1: First upper limit
        x2: Second upper limit
        rho: Correlation in [-1, 1]
        owen: Optional replacement for owen_t (self-test fault injection)

    Returns:
        P(X1 <= x1, X2 <= x2)

    Raises:
        DomainError: if |rho| > 1
    """
    x, y, r = np.broadcast_arrays(np.asarray(x1, dtype=float),
                                  np.asarray(x2, dtype=float),
                                  np.asarray(rho, dtype=float))
    if np.any(~(np.abs(r) <= 1.0)):
        raise DomainError(f"bvn_cdf requires |rho| <= 1, got {_first_bad(r, np.abs(r) <= 1.0)}")

    shape = x.shape
    x = x.ravel()
    y = y.ravel()
    r = r.ravel()
    result = np.empty(x.shape)

    upper = r == 1.0
    lower = r == -1.0
    result[upper] = special.ndtr(np.minimum(x[upper], y[upper]))
    result[lower] = np.maximum(special.ndtr(x[lower]) + special.ndtr(y[lower]) - 1.0, 0.0)

    inner = ~(upper | lower)
    finite = inner & np.isfinite(x) & np.isfinite(y)
    unbounded = inner & ~finite
    if np.any(unbounded):
        xu, yu = x[unbounded], y[unbounded]
        # an infinite upper limit integrates that coordinate out
        result[unbounded] = np.where(
            (xu == -np.inf) | (yu == -np.inf), 0.0,
            np.where(xu == np.inf, special.ndtr(yu), special.ndtr(xu)))
    if np.any(finite):
        result[finite] = _bvn_owen(x[finite], y[finite], r[finite], owen)

    return unwrap_scalar(result.reshape(shape))


def skew_norm_cdf(x, alpha, owen=None):
    """
    Standard skew-normal CDF with density 2 phi(x) Phi(alpha x).

    Args:
        x: Evaluation point
        alpha: Skewness parameter
        owen: Optional replacement for owen_t

    Returns:
        Phi(x) - 2 T(x, alpha), clipped to [0, 1]
    """
    owen = owen or owen_t
    x = np.asarray(x, dtype=float)
    value = special.ndtr(x) - 2.0 * np.asarray(owen(x, alpha))
    return unwrap_scalar(np.clip(value, 0.0, 1.0))


def _check_gamma_shape(a):
    a = np.asarray(a, dtype=float)
    if np.any(~(a > 0.0)):
        raise DomainError(f"incomplete gamma requires a > 0, got {_first_bad(a, a > 0.0)}")
    return a


def _check_probability(u, name):
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    if np.any(~inside):
        raise DomainError(f"{name} requires u in (0, 1), got {_first_bad(u, inside)}")
    return u


def reg_gamma_upper(a, x):
    """
    Regularized upper incomplete gamma Q(a, x).

    Args:
        a: Shape, a > 0
        x: Argument, x >= 0

    Returns:
        Q(a, x), decreasing in x from 1 at x = 0
    """
    a = _check_gamma_shape(a)
    x = np.asarray(x, dtype=float)
    if np.any(~(x >= 0.0)):
        raise DomainError(f"reg_gamma_upper requires x >= 0, got {_first_bad(x, x >= 0.0)}")
    return unwrap_scalar(special.gammaincc(a, x))


def reg_gamma_upper_inv(a, u):
    """Inverse of x -> Q(a, x) for u in (0, 1)."""
    a = _check_gamma_shape(a)
    u = _check_probability(u, 'reg_gamma_upper_inv')
    return unwrap_scalar(special.gammainccinv(a, u))


def reg_gamma_lower_inv(a, u):
    """Inverse of x -> P(a, x) = 1 - Q(a, x) for u in (0, 1)."""
    a = _check_gamma_shape(a)
    u = _check_probability(u, 'reg_gamma_lower_inv')
    return unwrap_scalar(special.gammaincinv(a, u))


def bessel_k(order, z):
    """Modified Bessel function of the second kind K_order(z) for z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0.0)):
        raise DomainError(f"bessel_k requires z > 0, got {_first_bad(z, z > 0.0)}")
    return unwrap_scalar(special.kv(order, z))
