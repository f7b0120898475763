"""
Mixing distributions on (0, inf) for normal variance-mean and scale mixtures.

Supported laws are the unit point mass, Gamma(shape, rate) and
InverseGamma(shape, rate), all exposed through quantile functions so that the
same inverse-CDF path feeds QMC integration and the sampling oracle. The
generalized inverse Gaussian family is available as a density only, plus its
gamma and inverse-gamma boundary cases.
"""

from dataclasses import dataclass
import enum
import math
import logging

import numpy as np

from modules.errors import DomainError, SpecValidationError
from modules.specfun.special_functions import (
    reg_gamma_upper,
    reg_gamma_upper_inv,
    reg_gamma_lower_inv,
    bessel_k,
    unwrap_scalar
)

logger = logging.getLogger(__name__)

_TINY = np.finfo(float).tiny


class MixingKind(enum.Enum):
    """Mixing distribution families."""
    DEGENERATE = "degenerate"
    GAMMA = "gamma"
    INVERSE_GAMMA = "inverse-gamma"


@dataclass(frozen=True)
class MixingSpec:
    """A mixing distribution; shape and rate are ignored for the point mass."""

    kind: MixingKind
    shape: float = None
    rate: float = None

    def __post_init__(self):
        if not isinstance(self.kind, MixingKind):
            raise DomainError(f"Unknown mixing kind: {self.kind!r}")
        if self.kind is MixingKind.DEGENERATE:
            return
        for name in ('shape', 'rate'):
            value = getattr(self, name)
            if value is None or not math.isfinite(value) or value <= 0:
                raise DomainError(f"{self.kind.value} mixing requires {name} > 0, got {value}")

    @property
    def is_degenerate(self):
        return self.kind is MixingKind.DEGENERATE

    def describe(self):
        if self.is_degenerate:
            return "degenerate"
        return f"{self.kind.value}({self.shape:g}, {self.rate:g})"


@dataclass(frozen=True)
class GigParams:
    """Generalized inverse Gaussian parameters (lambda, chi, psi)."""

    lam: float
    chi: float
    psi: float

    def __post_init__(self):
        if self.chi < 0 or self.psi < 0:
            raise DomainError(f"GIG requires chi >= 0 and psi >= 0, got chi={self.chi}, psi={self.psi}")
        if self.lam < 0 and not self.chi > 0:
            raise DomainError("GIG with lambda < 0 requires chi > 0")
        if self.lam == 0 and not (self.chi > 0 and self.psi > 0):
            raise DomainError("GIG with lambda = 0 requires chi > 0 and psi > 0")
        if self.lam > 0 and not self.psi > 0:
            raise DomainError("GIG with lambda > 0 requires psi > 0")


DEGENERATE = MixingSpec(MixingKind.DEGENERATE)


def gamma(shape, rate):
    return MixingSpec(MixingKind.GAMMA, float(shape), float(rate))


def inverse_gamma(shape, rate):
    return MixingSpec(MixingKind.INVERSE_GAMMA, float(shape), float(rate))


def ig_from_dof(nu):
    """
    Inverse-gamma mixing IG(nu/2, nu/2) that turns a normal mixture into a t-type law.

    Args:
        nu: Degrees of freedom, nu > 0

    Returns:
        MixingSpec for InverseGamma(nu/2, nu/2)
    """
    if nu is None or not math.isfinite(nu) or nu <= 0:
        raise DomainError(f"Degrees of freedom must be positive, got {nu}")
    return inverse_gamma(nu / 2.0, nu / 2.0)


def quantile(spec, u):
    """
    Quantile function of a mixing distribution.

    Args:
        spec: MixingSpec
        u: Probability or array of probabilities in (0, 1)

    Returns:
        Strictly positive quantile(s), nondecreasing in u
    """
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    if np.any(~inside):
        raise DomainError(f"Mixing quantile requires u in (0, 1), got {u[~inside].flat[0]}")

    if spec.kind is MixingKind.DEGENERATE:
        return unwrap_scalar(np.ones_like(u))
    if spec.kind is MixingKind.GAMMA:
        values = np.asarray(reg_gamma_lower_inv(spec.shape, u)) / spec.rate
        return unwrap_scalar(np.maximum(values, _TINY))
    # F(x) = Q(shape, rate / x), hence x = rate / Q^-1(shape, u)
    values = spec.rate / np.maximum(np.asarray(reg_gamma_upper_inv(spec.shape, u)), _TINY)
    return unwrap_scalar(values)


def cdf(spec, x):
    """
    Distribution function of a mixing distribution.

    Args:
        spec: MixingSpec
        x: Evaluation point(s)

    Returns:
        P(W <= x)
    """
    x = np.asarray(x, dtype=float)
    if spec.kind is MixingKind.DEGENERATE:
        return unwrap_scalar((x >= 1.0).astype(float))
    positive = np.maximum(x, 0.0)
    if spec.kind is MixingKind.GAMMA:
        values = 1.0 - np.asarray(reg_gamma_upper(spec.shape, spec.rate * positive))
    else:
        with np.errstate(divide='ignore'):
            values = np.asarray(reg_gamma_upper(spec.shape, spec.rate / positive))
    return unwrap_scalar(np.where(x > 0.0, values, 0.0))


def mean(spec):
    """Mean of the mixing distribution, inf when it does not exist."""
    if spec.kind is MixingKind.DEGENERATE:
        return 1.0
    if spec.kind is MixingKind.GAMMA:
        return spec.shape / spec.rate
    if spec.shape > 1.0:
        return spec.rate / (spec.shape - 1.0)
    return math.inf


def gig_pdf(params, x):
    """
    Density of the generalized inverse Gaussian distribution N^-(lambda, chi, psi).

    f(x) = (psi/chi)^(lambda/2) / (2 K_lambda(sqrt(psi chi))) * x^(lambda-1)
           * exp(-(psi x + chi/x) / 2)

    Only the interior case chi > 0, psi > 0 is evaluated; the boundary cases
    are the gamma and inverse-gamma laws, see from_gig.

    Args:
        params: GigParams
        x: Evaluation point(s), x > 0

    Returns:
        Density value(s)
    """
    if not (params.chi > 0 and params.psi > 0):
        raise DomainError(
            "gig_pdf covers chi > 0 and psi > 0 only; use from_gig for the gamma/inverse-gamma limits")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("gig_pdf requires x > 0")

    lam, chi, psi = params.lam, params.chi, params.psi
    norm = (psi / chi) ** (lam / 2.0) / (2.0 * bessel_k(lam, math.sqrt(psi * chi)))
    return unwrap_scalar(norm * x ** (lam - 1.0) * np.exp(-0.5 * (psi * x + chi / x)))


def from_gig(params):
    """
    Map a GIG boundary case to the equivalent mixing spec.

    N^-(lambda, chi, 0) with lambda < 0 is InverseGamma(-lambda, chi/2);
    N^-(lambda, 0, psi) with lambda > 0 is Gamma(lambda, psi/2).

    Args:
        params: GigParams on the boundary of the parameter domain

    Returns:
        MixingSpec
    """
    if params.psi == 0 and params.lam < 0:
        return inverse_gamma(-params.lam, params.chi / 2.0)
    if params.chi == 0 and params.lam > 0:
        return gamma(params.lam, params.psi / 2.0)
    raise DomainError(
        f"GIG({params.lam}, {params.chi}, {params.psi}) is not a gamma or inverse-gamma limit")


def to_document(spec):
    """JSON-ready dict form of a MixingSpec."""
    if spec.is_degenerate:
        return {'kind': spec.kind.value}
    return {'kind': spec.kind.value, 'shape': spec.shape, 'rate': spec.rate}


def from_document(document):
    """
    Parse a mixing object such as {"kind": "inverse-gamma", "shape": 2.0, "rate": 2.0}.

    Args:
        document: dict

    Returns:
        MixingSpec

    Raises:
        SpecValidationError: on unknown kinds or missing parameters
    """
    if not isinstance(document, dict) or 'kind' not in document:
        raise SpecValidationError(f"Mixing must be an object with a 'kind' field, got {document!r}")
    try:
        kind = MixingKind(document['kind'])
    except ValueError:
        valid = ', '.join(k.value for k in MixingKind)
        raise SpecValidationError(f"Unknown mixing kind {document['kind']!r}; expected one of {valid}")
    if kind is MixingKind.DEGENERATE:
        return DEGENERATE
    try:
        return MixingSpec(kind, float(document['shape']), float(document['rate']))
    except (KeyError, TypeError, ValueError) as e:
        raise SpecValidationError(f"Invalid {kind.value} mixing parameters: {e}")
