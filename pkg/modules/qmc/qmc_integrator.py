"""
Randomized quasi-Monte Carlo integration over the open unit cube.

Base points are unscrambled Sobol points (Joe-Kuo direction numbers, as
shipped with scipy.stats.qmc) held as SOBOL_BITS-bit integers. Each
replicate XORs them with its own random digital shift and centres them in
their grid cell, so every coordinate lies strictly inside (0, 1) and every
replicate mean is an unbiased estimate. The spread of the replicate means
gives the reported standard error.

Two calls with the same QmcConfig see identical nodes, which is what the
shared-node comparisons in the rank-correlation module rely on.
"""

from dataclasses import dataclass
import functools
import math
import logging

import numpy as np
from scipy.stats import qmc

from config.copula_constants import (
    DEFAULT_QMC_POINTS,
    DEFAULT_QMC_REPLICATES,
    DEFAULT_QMC_SEED,
    MIN_QMC_POINTS,
    MIN_QMC_REPLICATES,
    MAX_SOBOL_DIM,
    SOBOL_BITS
)
from modules.errors import DomainError, IntegrationError

logger = logging.getLogger(__name__)

_SCALE = float(2 ** SOBOL_BITS)


def _is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class QmcConfig:
    """Accuracy settings: nodes per replicate, number of replicates and seed."""

    points: int = DEFAULT_QMC_POINTS
    replicates: int = DEFAULT_QMC_REPLICATES
    seed: int = DEFAULT_QMC_SEED

    def __post_init__(self):
        if not _is_power_of_two(self.points) or self.points < MIN_QMC_POINTS:
            raise DomainError(f"QMC points must be a power of two >= {MIN_QMC_POINTS}, got {self.points}")
        if not isinstance(self.replicates, (int, np.integer)) or self.replicates < MIN_QMC_REPLICATES:
            raise DomainError(f"QMC replicates must be an integer >= {MIN_QMC_REPLICATES}, got {self.replicates}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise DomainError(f"QMC seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass(frozen=True)
class QmcEstimate:
    """Integral estimate with its replicate-based standard error."""

    value: float
    std_error: float
    points_used: int

    def affine(self, scale, offset=0.0):
        """Estimate of scale * integral + offset."""
        return QmcEstimate(scale * self.value + offset, abs(scale) * self.std_error, self.points_used)


def _check_dims(dim, n):
    if not isinstance(dim, (int, np.integer)) or not 1 <= dim <= MAX_SOBOL_DIM:
        raise DomainError(f"Sobol dimension must be in 1..{MAX_SOBOL_DIM}, got {dim}")
    if not _is_power_of_two(n):
        raise DomainError(f"Sobol point count must be a power of two, got {n}")


@functools.lru_cache(maxsize=64)
def _sobol_integers(dim, n):
    engine = qmc.Sobol(d=dim, scramble=False, bits=SOBOL_BITS)
    points = engine.random_base2(m=int(n).bit_length() - 1)
    integers = np.rint(points * _SCALE).astype(np.uint64)
    integers.setflags(write=False)
    return integers


def base_sobol(dim, n):
    """
    First n unshifted Sobol points in [0, 1)^dim, starting with the origin.

    Args:
        dim: Dimension, 1..MAX_SOBOL_DIM
        n: Number of points, a power of two

    Returns:
        Array of shape (n, dim)
    """
    _check_dims(dim, n)
    return _sobol_integers(dim, n) / _SCALE


def digital_shift(shift_seed, dim, stream=0):
    """Random SOBOL_BITS-bit integers, one per dimension, addressed by (seed, stream)."""
    sequence = np.random.SeedSequence(shift_seed, spawn_key=(stream,))
    generator = np.random.Generator(np.random.Philox(sequence))
    return generator.integers(0, 2 ** SOBOL_BITS, size=dim, dtype=np.uint64)


def sobol_points(dim, n, shift_seed, stream=0):
    """
    Digitally shifted Sobol points strictly inside (0, 1)^dim.

    Args:
        dim: Dimension, 1..MAX_SOBOL_DIM
        n: Number of points, a power of two
        shift_seed: Seed of the digital shift
        stream: Replicate index selecting an independent shift for the same seed

    Returns:
        Array of shape (n, dim), deterministic in (dim, n, shift_seed, stream)
    """
    _check_dims(dim, n)
    shifted = _sobol_integers(dim, n) ^ digital_shift(shift_seed, dim, stream)
    return (shifted.astype(float) + 0.5) / _SCALE


def integrate(f, dim, cfg=None):
    """
    Estimate the integral of f over (0, 1)^dim.

    Args:
        f: Vectorized integrand mapping an (n, dim) array to n values
        dim: Integration dimension
        cfg: QmcConfig (defaults when None)

    Returns:
        QmcEstimate: mean of replicate means and their standard error

    Raises:
        IntegrationError: if f returns a non-finite value
    """
    cfg = cfg or QmcConfig()
    replicate_means = np.empty(cfg.replicates)

    for replicate in range(cfg.replicates):
        u = sobol_points(dim, cfg.points, cfg.seed, stream=replicate)
        values = np.asarray(f(u), dtype=float)
        if values.ndim == 0:
            values = np.full(cfg.points, float(values))
        finite = np.isfinite(values)
        if not finite.all():
            index = int(np.argmin(finite))
            point = tuple(float(c) for c in u[index])
            logger.error(f"Integrand returned {values[index]} at {point}")
            raise IntegrationError(f"Integrand returned non-finite value {values[index]} at point {point}",
                                   point=point)
        replicate_means[replicate] = values.mean()

    value = float(replicate_means.mean())
    std_error = float(replicate_means.std(ddof=1) / math.sqrt(cfg.replicates))
    logger.debug(f"QMC dim={dim}: {value:.12g} +/- {std_error:.3g} ({cfg.points}x{cfg.replicates})")
    return QmcEstimate(value, std_error, cfg.points * cfg.replicates)


def symmetrized(f, permutation):
    """
    Average an integrand with its coordinate-permuted copy.

    The integral is unchanged; identities that hold under exchanging the
    permuted coordinates become exact on any fixed set of nodes.

    Args:
        f: Vectorized integrand
        permutation: Column order applied to the nodes for the second copy

    Returns:
        The symmetrized integrand
    """
    order = list(permutation)

    def integrand(u):
        return 0.5 * (np.asarray(f(u)) + np.asarray(f(u[:, order])))

    return integrand
