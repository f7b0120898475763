"""
Skewness reparameterizations for bivariate skew-normal scale mixtures.

The skewness vector alpha maps to delta = P alpha / sqrt(1 + alpha' P alpha)
with P the 2 x 2 correlation matrix; delta in turn gives the transformed
coefficients alpha-dagger and rho-dagger that enter the bivariate-normal form
of the rank correlations. Equi-skew (a, a) and single-skew (a, 0) settings
have closed forms of their own.
"""

from dataclasses import dataclass
import math
import logging

from modules.errors import DomainError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DerivedSkew:
    """delta, alpha-dagger and rho-dagger of an MSN copula."""

    delta: tuple
    alpha_dagger: tuple
    rho_dagger: float


def _check_rho(rho, closed=True):
    if not math.isfinite(rho) or abs(rho) > 1.0 or (not closed and abs(rho) == 1.0):
        interval = "[-1, 1]" if closed else "(-1, 1)"
        raise DomainError(f"rho must lie in {interval}, got {rho}")


def delta_from_alpha(rho, alpha):
    """
    delta_i = (alpha_i + rho alpha_-i) / sqrt(1 + alpha_1^2 + alpha_2^2 + 2 rho alpha_1 alpha_2).

    Args:
        rho: Correlation in [-1, 1]
        alpha: (alpha_1, alpha_2), unrestricted

    Returns:
        (delta_1, delta_2)
    """
    _check_rho(rho)
    a1, a2 = (float(a) for a in alpha)
    if not (math.isfinite(a1) and math.isfinite(a2)):
        raise DomainError(f"alpha must be finite, got {alpha}")
    norm = math.sqrt(1.0 + a1 * a1 + a2 * a2 + 2.0 * rho * a1 * a2)
    return ((a1 + rho * a2) / norm, (a2 + rho * a1) / norm)


def delta_is_admissible(rho, delta):
    """True when delta_1^2 + delta_2^2 - 2 rho delta_1 delta_2 < 1 - rho^2."""
    d1, d2 = delta
    return d1 * d1 + d2 * d2 - 2.0 * rho * d1 * d2 < 1.0 - rho * rho


def alpha_from_delta(rho, delta):
    """
    Inverse of delta_from_alpha for |rho| < 1.

    Args:
        rho: Correlation in (-1, 1)
        delta: Admissible (delta_1, delta_2)

    Returns:
        (alpha_1, alpha_2)

    Raises:
        DomainError: if delta is outside the admissible region
    """
    _check_rho(rho, closed=False)
    d1, d2 = (float(d) for d in delta)
    if not delta_is_admissible(rho, (d1, d2)):
        raise DomainError(f"delta={delta} violates the admissibility constraint at rho={rho}")
    one_minus = 1.0 - rho * rho
    slack = one_minus - (d1 * d1 + d2 * d2 - 2.0 * rho * d1 * d2)
    scale = math.sqrt(one_minus) * math.sqrt(slack)
    return ((d1 - rho * d2) / scale, (d2 - rho * d1) / scale)


def derived_skew(rho, alpha):
    """
    delta, alpha-dagger_i = delta_i / sqrt(1 - delta_i^2) and
    rho-dagger = (rho - delta_1 delta_2) / sqrt((1 - delta_1^2)(1 - delta_2^2)).

    At rho = +/-1 the two deltas coincide up to sign and rho-dagger equals rho.

    Args:
        rho: Correlation in [-1, 1]
        alpha: Skewness pair

    Returns:
        DerivedSkew
    """
    d1, d2 = delta_from_alpha(rho, alpha)
    c1 = 1.0 - d1 * d1
    c2 = 1.0 - d2 * d2
    if c1 <= 0.0 or c2 <= 0.0:
        raise DomainError(f"alpha={tuple(alpha)} is too large: delta={(d1, d2)} rounds to the unit boundary")
    if abs(rho) == 1.0:
        rho_dagger = float(rho)
    else:
        rho_dagger = max(-1.0, min(1.0, (rho - d1 * d2) / math.sqrt(c1 * c2)))
    return DerivedSkew(delta=(d1, d2),
                       alpha_dagger=(d1 / math.sqrt(c1), d2 / math.sqrt(c2)),
                       rho_dagger=rho_dagger)


def equi_skew_derived(rho, a):
    """
    Closed forms for alpha = (a, a).

    Returns:
        (delta_bar, a_dagger, rho_dagger) with
        delta_bar = a(1+rho) / sqrt(1 + 2a^2(1+rho)),
        a_dagger = a(1+rho) / sqrt(1 + a^2(1-rho^2)),
        rho_dagger = (1+rho) / (1 + a^2(1-rho^2)) - 1
    """
    _check_rho(rho)
    spread = 1.0 + a * a * (1.0 - rho * rho)
    delta_bar = a * (1.0 + rho) / math.sqrt(1.0 + 2.0 * a * a * (1.0 + rho))
    a_dagger = a * (1.0 + rho) / math.sqrt(spread)
    rho_dagger = (1.0 + rho) / spread - 1.0
    return delta_bar, a_dagger, rho_dagger


def single_skew_derived(rho, a):
    """
    Closed forms for alpha = (a, 0).

    Returns:
        (delta_circ, rho_dagger, alpha2_dagger) with delta_circ = a / sqrt(1+a^2),
        rho_dagger = rho / sqrt(1 + a^2(1-rho^2)) and alpha2_dagger = a rho_dagger;
        alpha1_dagger equals a
    """
    _check_rho(rho)
    delta_circ = a / math.sqrt(1.0 + a * a)
    rho_dagger = rho / math.sqrt(1.0 + a * a * (1.0 - rho * rho))
    return delta_circ, rho_dagger, a * rho_dagger
