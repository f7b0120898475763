"""
Rank-correlation curves over a grid of pseudo-correlations.

A curve evaluates both measures of one copula at every rho of a grid and
returns a DataFrame with columns rho, tau, tau_se, rhos, rhos_se in grid
order. Presets bundle families of curves that are usually compared side by side.
"""

from concurrent.futures import ThreadPoolExecutor
import math
import logging

import numpy as np
import pandas as pd

from config.copula_constants import SWEEP_PRESETS
from config.settings import ENABLE_PARALLEL_CURVES
from modules.errors import DomainError
from modules.rankcorr.copula_spec import Measure, copula_spec_from_document
from modules.rankcorr.rank_correlation import RankCorrelationCalculator

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ['rho', 'tau', 'tau_se', 'rhos', 'rhos_se']


def rho_grid(low, high, step):
    """
    Evenly spaced rho values from low to high inclusive.

    Args:
        low: First grid point, >= -1
        high: Last grid point, <= 1
        step: Spacing, > 0

    Returns:
        numpy array of grid points
    """
    for name, value in (('low', low), ('high', high), ('step', step)):
        if not math.isfinite(value):
            raise DomainError(f"Grid {name} must be finite, got {value}")
    if step <= 0:
        raise DomainError(f"Grid step must be positive, got {step}")
    if low < -1.0 or high > 1.0 or low > high:
        raise DomainError(f"Grid must satisfy -1 <= low <= high <= 1, got {low}:{high}")

    count = int(math.floor((high - low) / step + 1e-9)) + 1
    grid = np.round(low + step * np.arange(count), 12)
    return np.clip(grid, low, high)


def parse_rho_grid(text):
    """
    Parse a 'lo:hi:step' grid description.

    Args:
        text: Grid string such as '-1:1:0.05'

    Returns:
        numpy array of grid points
    """
    parts = text.split(':')
    if len(parts) != 3:
        raise DomainError(f"Grid must look like lo:hi:step, got {text!r}")
    try:
        low, high, step = (float(p) for p in parts)
    except ValueError:
        raise DomainError(f"Grid bounds must be numbers, got {text!r}")
    return rho_grid(low, high, step)


def rank_curve(spec, grid, calculator=None, method=None, parallel=None):
    """
    Evaluate Kendall's tau and Spearman's rho along a rho grid.

    Args:
        spec: CopulaSpec; its rho is replaced by each grid value
        grid: Iterable of rho values
        calculator: RankCorrelationCalculator (default configuration if omitted)
        method: MSN evaluation path override
        parallel: Evaluate grid points in a thread pool; defaults to ENABLE_PARALLEL_CURVES

    Returns:
        DataFrame with CURVE_COLUMNS, one row per grid point in grid order
    """
    calculator = calculator or RankCorrelationCalculator()
    parallel = ENABLE_PARALLEL_CURVES if parallel is None else parallel
    grid = [float(r) for r in grid]

    def row(rho):
        point = spec.with_rho(rho)
        tau = calculator.rank_correlation(point, Measure.KENDALL_TAU, method)
        rho_s = calculator.rank_correlation(point, Measure.SPEARMAN_RHO, method)
        return [rho, tau.value, tau.std_error, rho_s.value, rho_s.std_error]

    if parallel:
        # map keeps grid order whatever the completion order
        with ThreadPoolExecutor() as pool:
            rows = list(pool.map(row, grid))
    else:
        rows = [row(rho) for rho in grid]

    logger.info(f"Evaluated {len(rows)} grid points for {spec.family.value} skew={spec.skew}")
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def preset_curves(name):
    """
    Copula specs of a named sweep preset.

    Args:
        name: Key of SWEEP_PRESETS

    Returns:
        List of (label, CopulaSpec) pairs; labels are usable as file stems
    """
    if name not in SWEEP_PRESETS:
        raise DomainError(f"Unknown preset {name!r}; expected one of {', '.join(sorted(SWEEP_PRESETS))}")

    curves = []
    for family, nu, skew in SWEEP_PRESETS[name]:
        document = {'family': family, 'rho': 0.0, 'skew': list(skew)}
        label = f"{family}_s{skew[0]:g}_{skew[1]:g}"
        if nu is not None:
            document['nu'] = nu
            label = f"{family}_nu{nu:g}_s{skew[0]:g}_{skew[1]:g}"
        curves.append((label, copula_spec_from_document(document)))
    return curves
