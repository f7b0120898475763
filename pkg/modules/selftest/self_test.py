"""
Built-in self-test for the rank-correlation engine.

The quick level checks special-function identities, closed forms, exact
symmetries on shared QMC nodes and the boundary values; it runs in seconds.
The full level adds sampling-oracle agreement, agreement of the two MSN
evaluation paths, monotonicity grids and an inversion round trip.
"""

from dataclasses import dataclass
import math
import logging

import numpy as np

from config.copula_constants import GAUSSIAN_SPEARMAN_GAP, DEFAULT_QMC_SEED
from modules.estimate.moment_estimator import MomentEstimator
from modules.mixing import mixing_distribution as mixing
from modules.orthant.orthant_calculator import orthant_prob
from modules.qmc.qmc_integrator import QmcConfig
from modules.rankcorr.copula_spec import CopulaSpec, Family, Measure, Method
from modules.rankcorr.rank_correlation import (
    RankCorrelationCalculator,
    elliptical_kendall,
    gaussian_spearman
)
from modules.sampler.copula_sampler import RngState
from modules.sampler.empirical import oracle_check
from modules.specfun.special_functions import (
    owen_t,
    bvn_cdf,
    skew_norm_cdf,
    norm_cdf,
    norm_quantile,
    reg_gamma_upper
)

logger = logging.getLogger(__name__)

LEVELS = ('quick', 'full')
FAULTS = ('negate-owen-t',)

_RHO_GRID = np.array([-0.99, -0.9, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9, 0.99])
_X_GRID = np.linspace(-8.0, 8.0, 33)


@dataclass(frozen=True)
class CheckResult:
    """One self-test check: observed deviation against its tolerance."""

    name: str
    tolerance: float
    deviation: float

    @property
    def passed(self):
        return math.isfinite(self.deviation) and self.deviation <= self.tolerance


def _negated_owen_t(h, a):
    return -np.asarray(owen_t(h, a))


class SelfTestRunner:
    """Run the quick or full self-test suite."""

    def __init__(self, level='quick', fault=None):
        """
        Initialize self-test runner.

        Args:
            level: 'quick' or 'full'
            fault: Optional fault to inject ('negate-owen-t'), used to check the harness itself
        """
        if level not in LEVELS:
            raise ValueError(f"Unknown self-test level {level!r}")
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"Unknown fault {fault!r}")
        self.level = level
        self.fault = fault
        self.owen = _negated_owen_t if fault == 'negate-owen-t' else None
        quick_cfg = QmcConfig(points=2 ** 10, replicates=4, seed=DEFAULT_QMC_SEED)
        self.cfg = quick_cfg if level == 'quick' else QmcConfig()
        self.calculator = RankCorrelationCalculator(self.cfg)
        self.checks = []

    def _record(self, name, tolerance, deviation):
        check = CheckResult(name, float(tolerance), float(deviation))
        level = logging.INFO if check.passed else logging.WARNING
        logger.log(level, f"{name}: deviation {deviation:.3e} (tolerance {tolerance:.1e})")
        self.checks.append(check)
        return check

    def run(self):
        """
        Run every check of the configured level.

        Returns:
            List of CheckResult
        """
        self.checks = []
        self._special_functions()
        self._closed_forms()
        self._symmetries()
        self._boundaries()
        self._orthants()
        if self.level == 'full':
            self._oracle_agreement()
            self._dual_path()
            self._monotone_grids()
            self._inversion_round_trip()
        return self.checks

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    # ----- quick -----

    def _special_functions(self):
        owen = self.owen
        arcsin_form = 0.25 + np.arcsin(_RHO_GRID) / (2.0 * math.pi)
        self._record("bvn_cdf(0, 0, rho) arcsine form", 1e-12,
                     np.max(np.abs(bvn_cdf(0.0, 0.0, _RHO_GRID, owen=owen) - arcsin_form)))

        alphas = np.array([-5.0, -1.0, 0.5, 2.0, 10.0])
        self._record("skew_norm_cdf(0, alpha) arctan form", 1e-12,
                     np.max(np.abs(skew_norm_cdf(0.0, alphas, owen=owen) - (0.5 - np.arctan(alphas) / math.pi))))

        x, r = np.meshgrid(_X_GRID, _RHO_GRID[1:-1])
        diagonal = bvn_cdf(x, x, r, owen=owen)
        as_skew = skew_norm_cdf(x, np.sqrt((1.0 - r) / (1.0 + r)), owen=owen)
        self._record("bvn_cdf diagonal equals skew-normal cdf", 1e-10, np.max(np.abs(diagonal - as_skew)))

        reflected = bvn_cdf(0.0, x, r, owen=owen) + bvn_cdf(0.0, x, -r, owen=owen)
        self._record("bvn_cdf(0,x,rho) + bvn_cdf(0,x,-rho) = Phi(x)", 1e-10,
                     np.max(np.abs(reflected - norm_cdf(x))))

        self._record("norm_quantile(0.975)", 1e-12, abs(norm_quantile(0.975) - 1.959963984540054))
        self._record("reg_gamma_upper(2, 3) = 4 exp(-3)", 1e-14, abs(reg_gamma_upper(2.0, 3.0) - 4.0 * math.exp(-3.0)))

        u = np.linspace(0.001, 0.999, 999)
        spec = mixing.inverse_gamma(2.0, 2.0)
        self._record("inverse-gamma cdf(quantile(u)) = u", 1e-9,
                     np.max(np.abs(mixing.cdf(spec, mixing.quantile(spec, u)) - u)))

    def _closed_forms(self):
        ig = mixing.ig_from_dof(4.0)
        gaps = [abs(self.calculator.kendall_mn(r, (0.0, 0.0), ig).value - elliptical_kendall(r))
                for r in _RHO_GRID]
        self._record("Kendall tau of scale mixtures is (2/pi) arcsin rho", 1e-12, max(gaps))

        spearman = [gaussian_spearman(r) for r in _RHO_GRID]
        self._record("Gaussian |rho_S - rho| bound", GAUSSIAN_SPEARMAN_GAP,
                     max(abs(s - r) for s, r in zip(spearman, _RHO_GRID)))

        t_values = [abs(self.calculator.spearman_mn(r, (0.0, 0.0), ig).value) for r in _RHO_GRID]
        excess = max(t - abs(s) for t, s in zip(t_values, spearman))
        self._record("Student-t |rho_S| below the Gaussian value", 2e-3, max(excess, 0.0))

    def _symmetries(self):
        ig = mixing.ig_from_dof(4.0)
        calc = self.calculator
        swapped = abs(calc.spearman_mn(0.3, (1.0, 2.0), ig).raw_value
                      - calc.spearman_mn(0.3, (2.0, 1.0), ig).raw_value)
        self._record("MN Spearman component symmetry", 1e-12, swapped)

        flipped = abs(calc.kendall_mn(0.3, (1.0, 2.0), ig).raw_value
                      - calc.kendall_mn(0.3, (-1.0, -2.0), ig).raw_value)
        self._record("MN Kendall sign-flip invariance", 1e-12, flipped)

        flipped = abs(calc.kendall_msn(0.4, (2.0, 1.0), ig).raw_value
                      - calc.kendall_msn(0.4, (-2.0, -1.0), ig).raw_value)
        self._record("MSN Kendall sign-flip invariance", 1e-12, flipped)

        swapped = abs(calc.spearman_msn(0.4, (2.0, 1.0), ig).raw_value
                      - calc.spearman_msn(0.4, (1.0, 2.0), ig).raw_value)
        self._record("MSN Spearman component symmetry", 1e-12, swapped)

    def _boundaries(self):
        calc = self.calculator
        for nu in (1.0, 10.0):
            ig = mixing.ig_from_dof(nu)
            ends = [calc.kendall_msn(-1.0, (2.0, 1.0), ig).value + 1.0,
                    calc.kendall_msn(1.0, (2.0, 1.0), ig).value - 1.0,
                    calc.spearman_msn(-1.0, (2.0, 1.0), ig).value + 1.0,
                    calc.spearman_msn(1.0, (2.0, 1.0), ig).value - 1.0]
            self._record(f"AC skew-t nu={nu:g} endpoints are -1 and 1", 0.0, max(abs(e) for e in ends))

        ig = mixing.ig_from_dof(4.0)
        self._record("MN equi-skew tau(1, (1,1)) = 1", 2e-3,
                     abs(calc.kendall_mn(1.0, (1.0, 1.0), ig).value - 1.0))
        lower = calc.kendall_mn(-1.0, (1.0, 2.0), ig).value
        self._record("GH skew-t tau(-1, (1,2)) is positive", 0.0, -lower)

    def _orthants(self):
        identity = orthant_prob(np.eye(4), self.cfg)
        self._record("orthant probability of independent 4-vector", 1e-12, abs(identity.value - 1.0 / 16.0))

        equicorrelated = np.full((4, 4), 0.5) + 0.5 * np.eye(4)
        estimate = orthant_prob(equicorrelated, self.cfg)
        self._record("orthant probability with correlation 1/2", max(3.0 * estimate.std_error, 5e-4),
                     abs(estimate.value - 0.2))

    # ----- full -----

    def _oracle_agreement(self):
        lattice = [
            CopulaSpec(Family.MN, 0.3, (1.0, 2.0), mixing.ig_from_dof(4.0)),
            CopulaSpec(Family.MN, -0.5, (1.0, 1.0), mixing.ig_from_dof(10.0)),
            CopulaSpec(Family.MSN, 0.4, (2.0, 1.0), mixing.ig_from_dof(4.0)),
            CopulaSpec(Family.MSN, 0.5, (3.0, 0.0), mixing.DEGENERATE),
        ]
        rng = RngState(DEFAULT_QMC_SEED)
        for index, spec in enumerate(lattice):
            for measure in Measure:
                analytic = self.calculator.rank_correlation(spec, measure)
                empirical, se = oracle_check(spec, measure, 10_000, 20, RngState(rng.seed, index + 1))
                tolerance = 3.0 * math.hypot(se, analytic.std_error)
                self._record(f"oracle {spec.family.value} rho={spec.rho:g} skew={spec.skew} {measure.value}",
                             tolerance, abs(analytic.value - empirical))

    def _dual_path(self):
        calc = self.calculator
        for rho, alpha, spec in [(0.4, (2.0, 1.0), mixing.inverse_gamma(0.5, 0.5)),
                                 (0.4, (2.0, 1.0), mixing.inverse_gamma(5.0, 5.0)),
                                 (-0.3, (1.0, -2.0), mixing.DEGENERATE)]:
            for name, evaluate in (('tau', calc.kendall_msn), ('rhos', calc.spearman_msn)):
                thm = evaluate(rho, alpha, spec, Method.THM_EXPECTATION)
                cor = evaluate(rho, alpha, spec, Method.COR_BIVARIATE)
                self._record(f"dual path {name} rho={rho:g} alpha={alpha} {spec.describe()}",
                             3.0 * (thm.std_error + cor.std_error) + 1e-6, abs(thm.value - cor.value))

    def _monotone_grids(self):
        calc = self.calculator
        ig = mixing.ig_from_dof(4.0)
        grid = np.linspace(-0.9, 0.9, 7)
        taus = np.array([calc.kendall_mn(r, (1.0, 2.0), ig).raw_value for r in grid])
        self._record("MN tau increasing in rho", 0.0, -np.min(np.diff(taus)))

        levels = [0.0, 1.0, 2.0, 3.0]
        taus = np.array([calc.kendall_mn(0.3, (b, b), ig).raw_value for b in levels])
        self._record("MN equi-skew tau increasing in b", 0.0, -np.min(np.diff(taus)))

        taus = np.array([calc.kendall_msn(0.5, (a, a), mixing.DEGENERATE).raw_value for a in levels])
        self._record("skew-normal equi-skew tau decreasing in a", 0.0, np.max(np.diff(taus)))

    def _inversion_round_trip(self):
        estimator = MomentEstimator(self.cfg)
        ig = mixing.ig_from_dof(4.0)
        for rho in (-0.6, 0.0, 0.4):
            target = estimator.calculator.kendall_mn(rho, (1.0, 1.0), ig).value
            fit = estimator.invert_rho(target, Family.MN, (1.0, 1.0), ig, Measure.KENDALL_TAU)
            self._record(f"invert tau round trip rho={rho:g}", 1e-3, abs(fit.rho_hat - rho))
