"""
Empirical rank statistics and the sampling oracle.

Kendall's tau and Spearman's rho of a bivariate sample, a batch-means
oracle that estimates either measure for a CopulaSpec by simulation, and
CSV loading for external data. Ties abort: both statistics assume
continuous margins.
"""

import math
import logging

import numpy as np
import pandas as pd
from scipy import stats

from config.copula_constants import (
    MIN_ORACLE_BATCH_SIZE,
    MIN_ORACLE_BATCHES,
    KENDALL_REFERENCE_MAX_N
)
from modules.errors import DomainError, TieError
from modules.rankcorr.copula_spec import Measure
from modules.sampler.copula_sampler import Sample, sample

logger = logging.getLogger(__name__)


def check_ties(s):
    """
    Raise TieError if either coordinate of a sample has repeated values.

    Args:
        s: Sample
    """
    for column in range(2):
        unique = np.unique(s.x[:, column]).size
        if unique < s.n:
            raise TieError(f"Coordinate {column + 1} has {s.n - unique} tied value(s)",
                           coordinate=column + 1)


def empirical_kendall(s):
    """
    Kendall's tau (concordant - discordant pairs) / (n(n-1)/2).

    scipy's kendalltau counts discordant pairs by merge sort in O(n log n);
    without ties its tau-b equals this tau.

    Args:
        s: Sample without ties

    Returns:
        Empirical Kendall's tau
    """
    check_ties(s)
    return float(stats.kendalltau(s.x[:, 0], s.x[:, 1])[0])


def kendall_reference(s):
    """
    O(n^2) pairwise Kendall's tau for cross-checking small samples.

    Args:
        s: Sample with at most KENDALL_REFERENCE_MAX_N rows and no ties

    Returns:
        Empirical Kendall's tau
    """
    if s.n > KENDALL_REFERENCE_MAX_N:
        raise DomainError(f"kendall_reference is limited to {KENDALL_REFERENCE_MAX_N} rows, got {s.n}")
    check_ties(s)
    x, y = s.x[:, 0], s.x[:, 1]
    signs = np.sign(x[:, None] - x[None, :]) * np.sign(y[:, None] - y[None, :])
    return float(signs.sum() / (s.n * (s.n - 1)))


def empirical_spearman(s):
    """
    Spearman's rho as the Pearson correlation of the rank vectors.

    Args:
        s: Sample without ties

    Returns:
        Empirical Spearman's rho
    """
    check_ties(s)
    ranks_x = stats.rankdata(s.x[:, 0])
    ranks_y = stats.rankdata(s.x[:, 1])
    return float(np.corrcoef(ranks_x, ranks_y)[0, 1])


def empirical_statistic(s, measure):
    if measure is Measure.KENDALL_TAU:
        return empirical_kendall(s)
    return empirical_spearman(s)


def oracle_check(spec, measure, n, batches, rng):
    """
    Simulation estimate of a rank correlation by batch means.

    Args:
        spec: CopulaSpec with |rho| < 1
        measure: Measure
        n: Draws per batch, at least MIN_ORACLE_BATCH_SIZE
        batches: Number of batches, at least MIN_ORACLE_BATCHES
        rng: RngState; batch b uses rng.for_batch(b)

    Returns:
        Tuple of (mean of batch statistics, standard error of that mean)
    """
    if n < MIN_ORACLE_BATCH_SIZE:
        raise DomainError(f"Oracle batches need at least {MIN_ORACLE_BATCH_SIZE} draws, got {n}")
    if batches < MIN_ORACLE_BATCHES:
        raise DomainError(f"Oracle needs at least {MIN_ORACLE_BATCHES} batches, got {batches}")

    values = np.array([empirical_statistic(sample(spec, n, rng.for_batch(b)), measure)
                       for b in range(batches)])
    estimate = float(values.mean())
    se = float(values.std(ddof=1) / math.sqrt(batches))
    logger.info(f"Oracle {measure.value}: {estimate:.6f} +/- {se:.2e} ({batches} x {n} draws)")
    return estimate, se


def read_csv_sample(path):
    """
    Load a two-column numeric CSV (comma separated, header optional).

    Args:
        path: CSV file path

    Returns:
        Sample built from both columns

    Raises:
        DomainError: if the file is missing or not two numeric columns
    """
    try:
        frame = pd.read_csv(path, header=None, skip_blank_lines=True)
    except FileNotFoundError:
        raise DomainError(f"Data file not found: {path}")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise DomainError(f"Could not parse {path}: {e}")

    if frame.shape[1] != 2:
        raise DomainError(f"{path} must have exactly two numeric columns, found {frame.shape[1]}")
    numeric = frame.apply(pd.to_numeric, errors='coerce')
    if len(numeric) and numeric.iloc[0].isna().any() and not numeric.iloc[1:].isna().any().any():
        logger.debug(f"Treating the first row of {path} as a header")
        numeric = numeric.iloc[1:]
    if numeric.isna().any().any():
        raise DomainError(f"{path} contains non-numeric values")
    return Sample(numeric.to_numpy(dtype=float))
