"""
Monte Carlo draws from the copula-generating distributions.

Normal location-scale mixtures X = W beta + sqrt(W) Z and skew-normal scale
mixtures X = sqrt(W) Z, with W drawn through the mixing quantile function
and the skew-normal Z through its selection representation. Draws come
from a Philox counter-based generator addressed by (seed, batch index), so
any batch can be regenerated on its own.
"""

from dataclasses import dataclass
import numbers
import logging

import numpy as np

from modules.errors import DomainError, MatrixError
from modules.mixing import mixing_distribution as mixing
from modules.rankcorr.copula_spec import Family
from modules.rankcorr.skew_parameters import delta_from_alpha

logger = logging.getLogger(__name__)

_MANTISSA = 2 ** 53


@dataclass(frozen=True)
class RngState:
    """Seed and stream index of a counter-based generator."""

    seed: int
    stream: int = 0

    def generator(self):
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.Philox(sequence))

    def for_batch(self, batch):
        """Independent stream for one oracle batch."""
        return RngState(self.seed, self.stream * 1_000_003 + batch + 1)


@dataclass(frozen=True)
class Sample:
    """n draws of a bivariate random vector, shape (n, 2)."""

    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 2 or x.shape[1] != 2:
            raise DomainError(f"A sample must have two columns, got shape {x.shape}")
        if x.shape[0] < 2:
            raise DomainError(f"A sample needs at least 2 rows, got {x.shape[0]}")
        if not np.all(np.isfinite(x)):
            raise DomainError("Sample contains non-finite values")
        object.__setattr__(self, 'x', x)

    @property
    def n(self):
        return self.x.shape[0]

    def swapped(self):
        return Sample(self.x[:, ::-1])


def _open_uniforms(generator, n):
    """Uniforms strictly inside (0, 1)."""
    return (generator.integers(0, _MANTISSA, size=n).astype(float) + 0.5) / _MANTISSA


def _check_sampler_args(rho, n):
    if not (isinstance(rho, numbers.Real) and abs(rho) < 1.0):
        raise DomainError(f"Sampling requires |rho| < 1, got {rho}")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise DomainError(f"Sample size must be an integer >= 2, got {n}")


def sample_mn(rho, beta, mixing_spec, n, rng):
    """
    Draw from the normal location-scale mixture W beta + sqrt(W) Z.

    Args:
        rho: Correlation of Z, |rho| < 1
        beta: Skewness pair
        mixing_spec: MixingSpec of W
        n: Number of draws
        rng: RngState

    Returns:
        Sample
    """
    _check_sampler_args(rho, n)
    generator = rng.generator()
    w = mixing.quantile(mixing_spec, _open_uniforms(generator, n))
    chol = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    z = generator.standard_normal((n, 2)) @ chol.T
    w = np.asarray(w, dtype=float)[:, None]
    return Sample(w * np.asarray(beta, dtype=float) + np.sqrt(w) * z)


def sample_msn(rho, alpha, mixing_spec, n, rng):
    """
    Draw from the skew-normal scale mixture sqrt(W) Z.

    (Z0, Z~) is drawn from N(0, [[1, delta'], [delta, P]]) and Z = Z~ when
    Z0 > 0, -Z~ otherwise.

    Args:
        rho: Correlation parameter, |rho| < 1
        alpha: Skewness pair
        mixing_spec: MixingSpec of W
        n: Number of draws
        rng: RngState

    Returns:
        Sample
    """
    _check_sampler_args(rho, n)
    d1, d2 = delta_from_alpha(rho, alpha)
    omega = np.array([[1.0, d1, d2], [d1, 1.0, rho], [d2, rho, 1.0]])
    try:
        chol = np.linalg.cholesky(omega)
    except np.linalg.LinAlgError as e:
        logger.error(f"Skew-normal selection matrix is singular for rho={rho}, alpha={alpha}")
        raise MatrixError(f"Skew-normal selection matrix is not positive definite: {e}")

    generator = rng.generator()
    w = np.asarray(mixing.quantile(mixing_spec, _open_uniforms(generator, n)), dtype=float)
    draws = generator.standard_normal((n, 3)) @ chol.T
    z = np.where(draws[:, :1] > 0.0, draws[:, 1:], -draws[:, 1:])
    return Sample(np.sqrt(w)[:, None] * z)


def sample(spec, n, rng):
    """Draw n points from the generating distribution of a CopulaSpec."""
    if spec.family is Family.MN:
        return sample_mn(spec.rho, spec.skew, spec.mixing, n, rng)
    return sample_msn(spec.rho, spec.skew, spec.mixing, n, rng)
