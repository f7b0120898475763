"""
Rank-based method-of-moments inversion.

Given a target Kendall's tau or Spearman's rho, recover the pseudo-correlation
rho by Brent's method on rho -> value(rho) - target. Every evaluation reuses
the same QMC configuration, so the objective is a deterministic function of
rho rather than a noisy estimate. With both targets, the equi-skew submodel
(s, s) is solved for (rho, s) by bisection on the skew level around an inner
tau inversion.
"""

from dataclasses import dataclass
import math
import numbers
import logging

import numpy as np
from scipy import optimize

from config.copula_constants import (
    MAX_SOLVER_ITERATIONS,
    SOLVER_TOL_FLOOR,
    SOLVER_TOL_ERROR_FACTOR,
    SOLVER_XTOL,
    EQUI_SKEW_BRACKET,
    EQUI_SKEW_PROBES,
    EQUI_SKEW_MAX_BISECTIONS
)
from modules.errors import DomainError, NoConvergence, NonIdentified, OutOfAttainableRange
from modules.rankcorr.copula_spec import Family, Measure, Method
from modules.rankcorr.rank_correlation import RankCorrelationCalculator
from modules.sampler.empirical import empirical_kendall, empirical_spearman

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of a single-moment inversion."""

    rho_hat: float
    residual: float
    iterations: int
    bracket: tuple
    attainable: tuple
    target: float
    measure: Measure


@dataclass(frozen=True)
class EquiSkewResult:
    """Outcome of the two-moment equi-skew inversion."""

    rho_hat: float
    skew_hat: float
    residuals: tuple  # (tau residual, rho_S residual)
    iterations: int
    probe: tuple  # (skew level, rho_S residual or None when tau is unattainable)
    roots_found: int


def _check_target(target, name='target'):
    if not isinstance(target, numbers.Real) or not math.isfinite(target) or abs(target) > 1.0:
        raise DomainError(f"{name} must lie in [-1, 1], got {target}")
    return float(target)


class MomentEstimator:
    """Invert rank-correlation formulas for the pseudo-correlation (and equi-skew level)."""

    def __init__(self, cfg=None, method=Method.COR_BIVARIATE):
        """
        Initialize moment estimator.

        Args:
            cfg: QmcConfig used for every forward evaluation
            method: MSN evaluation path
        """
        self.calculator = RankCorrelationCalculator(cfg, method)

    @property
    def cfg(self):
        return self.calculator.cfg

    def _evaluate(self, family, rho, skew, mixing_spec, measure):
        calc = self.calculator
        if family is Family.MN:
            if measure is Measure.KENDALL_TAU:
                return calc.kendall_mn(rho, skew, mixing_spec)
            return calc.spearman_mn(rho, skew, mixing_spec)
        if measure is Measure.KENDALL_TAU:
            return calc.kendall_msn(rho, skew, mixing_spec)
        return calc.spearman_msn(rho, skew, mixing_spec)

    def attainable_range(self, family, skew, mixing_spec, measure):
        """
        Values of the measure at rho = -1 and rho = 1.

        Both measures increase in rho, so these are the extremes. Skew-normal
        scale mixtures always reach -1 and 1.

        Returns:
            Tuple (low, high)
        """
        if family is Family.MSN:
            return (-1.0, 1.0)
        low = self._evaluate(family, -1.0, skew, mixing_spec, measure).value
        high = self._evaluate(family, 1.0, skew, mixing_spec, measure).value
        return (low, high)

    def invert_rho(self, target, family, skew, mixing_spec, measure, tol=None):
        """
        Solve value(rho) = target for rho in [-1, 1].

        Args:
            target: Target rank correlation
            family: Family
            skew: Skewness pair
            mixing_spec: MixingSpec
            measure: Measure of the target
            tol: Accepted |value(rho_hat) - target|; None uses 10 x the
                integration error at the root, at least SOLVER_TOL_FLOOR

        Returns:
            EstimateResult

        Raises:
            OutOfAttainableRange: if the target lies outside the attainable range
            NoConvergence: if Brent's method does not meet the tolerance
        """
        target = _check_target(target)
        attainable = self.attainable_range(family, skew, mixing_spec, measure)
        low, high = attainable
        if target < low or target > high:
            logger.info(f"Target {measure.value}={target} outside attainable range [{low:.6f}, {high:.6f}]")
            raise OutOfAttainableRange(
                f"Target {measure.value}={target:g} is outside the attainable range [{low:.6f}, {high:.6f}]",
                attainable)
        if target == low or target == high:
            rho = -1.0 if target == low else 1.0
            return EstimateResult(rho, 0.0, 0, (rho, rho), attainable, target, measure)

        below, above = -1.0, 1.0

        def objective(rho):
            nonlocal below, above
            gap = self._evaluate(family, rho, skew, mixing_spec, measure).value - target
            if gap < 0.0:
                below = max(below, rho)
            elif gap > 0.0:
                above = min(above, rho)
            else:
                below = above = rho
            return gap

        try:
            root, info = optimize.brentq(objective, -1.0, 1.0, xtol=SOLVER_XTOL,
                                         maxiter=MAX_SOLVER_ITERATIONS, full_output=True, disp=False)
        except ValueError as e:
            logger.error(f"Brent bracketing failed for target {target}: {e}")
            raise NoConvergence(f"Root bracketing failed: {e}")

        final = self._evaluate(family, root, skew, mixing_spec, measure)
        residual = final.value - target
        noise_floor = SOLVER_TOL_ERROR_FACTOR * final.std_error
        if tol is None:
            tol = max(SOLVER_TOL_FLOOR, noise_floor)
        elif tol < noise_floor:
            logger.warning(f"Tolerance {tol:.1e} is below 10 x the integration error {final.std_error:.1e}")
        if not info.converged or abs(residual) > tol:
            logger.error(f"Inversion stalled: rho={root}, residual={residual:.3e}, flag={info.flag}")
            raise NoConvergence(
                f"No convergence after {info.iterations} iterations (residual {residual:.3e}, tol {tol:.1e})")

        bracket = (min(below, root), max(above, root))
        logger.info(f"Inverted {measure.value}={target:.6f} to rho={root:.10f} in {info.iterations} iterations")
        return EstimateResult(float(root), float(residual), int(info.iterations), bracket,
                              attainable, target, measure)

    def invert_equi_skew(self, target_tau, target_rho_s, family, mixing_spec,
                         tol=None, bracket=EQUI_SKEW_BRACKET, probes=EQUI_SKEW_PROBES):
        """
        Solve for (rho, s) with skewness (s, s) matching both targets.

        For each skew level the tau target fixes rho; the remaining Spearman
        residual is probed on a coarse grid over the bracket and a sign change
        is refined by bisection.

        Args:
            target_tau: Target Kendall's tau
            target_rho_s: Target Spearman's rho
            family: Family
            mixing_spec: MixingSpec
            tol: Accepted |rho_S residual| (SOLVER_TOL_FLOOR when None); the inner
                tau inversions receive it unchanged
            bracket: (low, high) search range for the skew level
            probes: Number of grid points in the initial probe

        Returns:
            EquiSkewResult

        Raises:
            OutOfAttainableRange: if no level matches both targets
            NonIdentified: if the residual stays within tol across the bracket
            NoConvergence: if bisection does not meet the tolerance
        """
        target_tau = _check_target(target_tau, 'target_tau')
        target_rho_s = _check_target(target_rho_s, 'target_rho_s')
        spread_tol = SOLVER_TOL_FLOOR if tol is None else tol
        evaluations = 0

        def residual(level):
            nonlocal evaluations
            evaluations += 1
            skew = (level, level)
            try:
                fit = self.invert_rho(target_tau, family, skew, mixing_spec, Measure.KENDALL_TAU, tol)
            except OutOfAttainableRange:
                return None, None
            rho_s = self._evaluate(family, fit.rho_hat, skew, mixing_spec, Measure.SPEARMAN_RHO).value
            return rho_s - target_rho_s, fit

        probe = []
        for level in np.linspace(bracket[0], bracket[1], probes):
            gap, fit = residual(float(level))
            probe.append((float(level), gap, fit))

        valid = [(level, gap, fit) for level, gap, fit in probe if gap is not None]
        probe_summary = tuple((level, gap) for level, gap, _ in probe)
        if not valid:
            attainable = self.attainable_range(family, (bracket[0], bracket[0]), mixing_spec, Measure.KENDALL_TAU)
            raise OutOfAttainableRange(
                f"Target tau={target_tau:g} is not attainable at any skew level in {bracket}", attainable)

        if max(abs(gap) for _, gap, _ in valid) <= spread_tol:
            raise NonIdentified(
                f"Spearman residual stays within {spread_tol:g} across skew levels {bracket}; the skew level is not identified")

        changes = [(valid[i], valid[i + 1]) for i in range(len(valid) - 1)
                   if valid[i][1] * valid[i + 1][1] < 0.0]
        exact = [entry for entry in valid if abs(entry[1]) <= spread_tol]

        if not changes:
            if exact:
                level, gap, fit = min(exact, key=lambda entry: abs(entry[1]))
                return EquiSkewResult(fit.rho_hat, level, (fit.residual, gap), evaluations, probe_summary,
                                      len(exact))
            gaps = [gap for _, gap, _ in valid]
            attainable = (target_rho_s + min(gaps), target_rho_s + max(gaps))
            raise OutOfAttainableRange(
                f"Spearman target {target_rho_s:g} is inconsistent with tau={target_tau:g}; "
                f"reachable rho_S at that tau spans [{attainable[0]:.6f}, {attainable[1]:.6f}]",
                attainable)

        if len(changes) > 1:
            logger.warning(f"{len(changes)} sign changes of the Spearman residual; keeping the sharpest")
        left, right = min(changes, key=lambda pair: abs(pair[0][1]) + abs(pair[1][1]))

        for _ in range(EQUI_SKEW_MAX_BISECTIONS):
            level = 0.5 * (left[0] + right[0])
            gap, fit = residual(level)
            if gap is None:
                raise NoConvergence(f"tau target became unattainable at skew level {level:g} during bisection")
            if abs(gap) <= spread_tol:
                logger.info(f"Equi-skew solution rho={fit.rho_hat:.8f}, skew={level:.8f}")
                return EquiSkewResult(fit.rho_hat, level, (fit.residual, gap), evaluations, probe_summary,
                                      len(changes))
            if gap * left[1] < 0.0:
                right = (level, gap, fit)
            else:
                left = (level, gap, fit)

        raise NoConvergence(f"Equi-skew bisection did not reach tolerance {spread_tol:g}")

    def estimate_from_sample(self, sample, family, skew, mixing_spec, tol=None):
        """
        Invert the empirical Kendall's tau and Spearman's rho of a sample.

        Args:
            sample: Sample without ties
            family: Family
            skew: Skewness pair
            mixing_spec: MixingSpec

        Returns:
            Dictionary with both statistics, both inversions and their discrepancy
        """
        tau = empirical_kendall(sample)
        rho_s = empirical_spearman(sample)
        from_tau = self.invert_rho(tau, family, skew, mixing_spec, Measure.KENDALL_TAU, tol)
        from_rho_s = self.invert_rho(rho_s, family, skew, mixing_spec, Measure.SPEARMAN_RHO, tol)
        return {
            'n': sample.n,
            'tau': tau,
            'rhos': rho_s,
            'from_tau': from_tau,
            'from_rhos': from_rho_s,
            'discrepancy': abs(from_tau.rho_hat - from_rho_s.rho_hat),
        }
