"""
Kendall's tau and Spearman's rho of skew-elliptical copulas.

Normal location-scale mixtures X = W beta + sqrt(W) Z reduce to expectations
of bivariate normal CDFs over the mixing law; skew-normal scale mixtures
X = sqrt(W) Z reduce either to expected 4- and 5-dimensional orthant
probabilities or, equivalently, to bivariate normal CDFs of half-normal
combinations. All expectations are integrated with the QMC driver, so two
calls with the same QmcConfig share their nodes.

Every bivariate integrand is evaluated in the centred form
Phi_2(x, y; r) - [Phi(x) + Phi(y)]/2 + 1/2. Both arguments are symmetric
about zero in distribution, so the added term has mean zero; with it the
integrand is exactly invariant under (x, y) -> (-x, -y).
"""

from dataclasses import dataclass
import math
import numbers
import logging

import numpy as np
from scipy import special

from config.copula_constants import TWO_OVER_PI, SIX_OVER_PI
from modules.errors import DomainError
from modules.mixing import mixing_distribution as mixing
from modules.orthant.orthant_calculator import (
    build_p_tau,
    build_p_s,
    p_tau_batch,
    p_s_batch,
    orthant_prob,
    orthant_expectation,
    boundary_rho
)
from modules.qmc.qmc_integrator import QmcConfig, QmcEstimate, integrate, symmetrized
from modules.rankcorr.copula_spec import CopulaSpec, Family, Measure, Method
from modules.rankcorr.skew_parameters import derived_skew
from modules.specfun.special_functions import bvn_cdf

logger = logging.getLogger(__name__)

_C = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class RankResult:
    """A rank correlation value, clamped to [-1, 1], with its provenance."""

    measure: Measure
    estimate: QmcEstimate
    method: Method
    raw_value: float

    @property
    def value(self):
        return self.estimate.value

    @property
    def std_error(self):
        return self.estimate.std_error


def _result(measure, estimate, method):
    raw = estimate.value
    if abs(raw) > 1.0 + 5.0 * estimate.std_error:
        logger.warning(f"{measure.value} estimate {raw:.6g} lies outside [-1, 1] beyond 5 standard errors")
    clamped = QmcEstimate(min(1.0, max(-1.0, raw)), estimate.std_error, estimate.points_used)
    return RankResult(measure, clamped, method, raw)


def _exact(measure, value):
    return _result(measure, QmcEstimate(float(value), 0.0, 0), Method.CLOSED_FORM)


def elliptical_kendall(rho):
    """Kendall's tau of any elliptical copula: (2/pi) arcsin rho."""
    return TWO_OVER_PI * math.asin(rho)


def gaussian_spearman(rho):
    """Spearman's rho of the Gaussian copula: (6/pi) arcsin(rho/2)."""
    return SIX_OVER_PI * math.asin(rho / 2.0)


def centered_bvn(x, y, r):
    """Phi_2(x, y; r) - [Phi(x) + Phi(y)]/2 + 1/2."""
    return bvn_cdf(x, y, r) - 0.5 * (special.ndtr(x) + special.ndtr(y)) + 0.5


def _half_normal(u):
    return special.ndtri(0.5 * (1.0 + u))


def _check_rho(rho):
    if not (isinstance(rho, numbers.Real) and -1.0 <= rho <= 1.0):
        raise DomainError(f"rho must lie in [-1, 1], got {rho}")
    return float(rho)


def _pair(values, name):
    pair = tuple(float(v) for v in values)
    if len(pair) != 2 or not all(math.isfinite(v) for v in pair):
        raise DomainError(f"{name} must be a pair of finite numbers, got {values}")
    return pair


class RankCorrelationCalculator:
    """Evaluate rank correlations of MN and MSN copulas with a fixed QMC configuration."""

    def __init__(self, cfg=None, method=Method.COR_BIVARIATE):
        """
        Initialize rank correlation calculator.

        Args:
            cfg: QmcConfig shared by every evaluation of this calculator
            method: Default MSN evaluation path (COR_BIVARIATE or THM_EXPECTATION)
        """
        self.cfg = cfg or QmcConfig()
        self.method = method

    # ----- normal location-scale mixtures -----

    def kendall_mn(self, rho, beta, mixing_spec):
        """
        Kendall's tau of an MN copula: 4 E Phi_2(beta_1 g, beta_2 g; rho) - 1 with
        g = (W* - W) / sqrt(W + W*) for independent mixing draws W, W*.

        Args:
            rho: Pseudo-correlation in [-1, 1]
            beta: Skewness pair
            mixing_spec: MixingSpec

        Returns:
            RankResult; zero skewness or degenerate mixing are closed form
        """
        rho = _check_rho(rho)
        b1, b2 = _pair(beta, 'beta')
        if (b1 == 0.0 and b2 == 0.0) or mixing_spec.is_degenerate:
            return _exact(Measure.KENDALL_TAU, elliptical_kendall(rho))

        def integrand(u):
            w = mixing.quantile(mixing_spec, u)
            g = (w[:, 1] - w[:, 0]) / np.sqrt(w[:, 0] + w[:, 1])
            return 4.0 * centered_bvn(b1 * g, b2 * g, rho) - 1.0

        return _result(Measure.KENDALL_TAU, integrate(integrand, 2, self.cfg), Method.THM_EXPECTATION)

    def spearman_mn(self, rho, beta, mixing_spec):
        """
        Spearman's rho of an MN copula: 12 E Phi_2(beta_1 h1, beta_2 h2; rho h3) - 3 with
        h_i = (W_i - W_3) / sqrt(W_i + W_3) and h3 = W_3 / sqrt((W_1 + W_3)(W_2 + W_3)).

        Args:
            rho: Pseudo-correlation in [-1, 1]
            beta: Skewness pair
            mixing_spec: MixingSpec

        Returns:
            RankResult
        """
        rho = _check_rho(rho)
        b1, b2 = _pair(beta, 'beta')
        if mixing_spec.is_degenerate:
            # h1 = h2 = 0 and h3 = 1/2 whatever beta is
            return _exact(Measure.SPEARMAN_RHO, gaussian_spearman(rho))
        if b1 == 0.0 and b2 == 0.0:
            return self._elliptical_spearman(rho, mixing_spec)

        def integrand(u):
            w = mixing.quantile(mixing_spec, u)
            h1 = (w[:, 0] - w[:, 2]) / np.sqrt(w[:, 0] + w[:, 2])
            h2 = (w[:, 1] - w[:, 2]) / np.sqrt(w[:, 1] + w[:, 2])
            h3 = w[:, 2] / np.sqrt((w[:, 0] + w[:, 2]) * (w[:, 1] + w[:, 2]))
            return 12.0 * centered_bvn(b1 * h1, b2 * h2, rho * h3) - 3.0

        estimate = integrate(symmetrized(integrand, (1, 0, 2)), 3, self.cfg)
        return _result(Measure.SPEARMAN_RHO, estimate, Method.THM_EXPECTATION)

    def _elliptical_spearman(self, rho, mixing_spec):
        """(6/pi) E arcsin(rho V3) for a zero-skew scale mixture."""
        def integrand(u):
            w = mixing.quantile(mixing_spec, u)
            v3 = w[:, 2] / np.sqrt((w[:, 0] + w[:, 2]) * (w[:, 1] + w[:, 2]))
            return SIX_OVER_PI * np.arcsin(rho * v3)

        return _result(Measure.SPEARMAN_RHO, integrate(integrand, 3, self.cfg), Method.THM_EXPECTATION)

    # ----- skew-normal scale mixtures -----

    def _method(self, method):
        method = method or self.method
        if method not in (Method.THM_EXPECTATION, Method.COR_BIVARIATE):
            raise DomainError(f"MSN evaluation method must be thm or cor, got {method}")
        return method

    def kendall_msn(self, rho, alpha, mixing_spec, method=None):
        """
        Kendall's tau of an MSN copula.

        THM_EXPECTATION: 16 E Phi_4(0; P_tau(rho, delta, V)) - 1 with
        V = (sqrt(W2/(W1+W2)), -sqrt(W1/(W1+W2))); deterministic V = (c, -c)
        for degenerate mixing, c = 1/sqrt(2).
        COR_BIVARIATE: 4 E Phi_2(a1' Z, a2' Z; rho') - 1 with Z = V1 Y1 + V2 Y2,
        Y_i half-normal.

        Args:
            rho: Pseudo-correlation in [-1, 1]
            alpha: Skewness pair
            mixing_spec: MixingSpec
            method: Evaluation path, defaults to the calculator's

        Returns:
            RankResult; rho = +/-1 returns +/-1 exactly
        """
        rho = _check_rho(rho)
        alpha = _pair(alpha, 'alpha')
        method = self._method(method)
        if abs(rho) == 1.0:
            return _exact(Measure.KENDALL_TAU, rho)
        if alpha == (0.0, 0.0):
            return _exact(Measure.KENDALL_TAU, elliptical_kendall(rho))

        derived = derived_skew(rho, alpha)
        if method is Method.THM_EXPECTATION:
            if mixing_spec.is_degenerate:
                estimate = orthant_prob(build_p_tau(rho, derived.delta, (_C, -_C)), self.cfg)
            else:
                def matrices(u):
                    w = mixing.quantile(mixing_spec, u)
                    total = w[:, 0] + w[:, 1]
                    return p_tau_batch(boundary_rho(rho), derived.delta,
                                       np.sqrt(w[:, 1] / total), -np.sqrt(w[:, 0] / total))

                estimate = orthant_expectation(matrices, 2, 4, self.cfg)
            return _result(Measure.KENDALL_TAU, estimate.affine(16.0, -1.0), method)

        a1, a2 = derived.alpha_dagger
        r = derived.rho_dagger
        if mixing_spec.is_degenerate:
            def integrand(u):
                z = _C * (_half_normal(u[:, 0]) - _half_normal(u[:, 1]))
                return 4.0 * centered_bvn(a1 * z, a2 * z, r) - 1.0

            return _result(Measure.KENDALL_TAU, integrate(integrand, 2, self.cfg), method)

        def integrand(u):
            w = mixing.quantile(mixing_spec, u[:, :2])
            total = w[:, 0] + w[:, 1]
            z = (np.sqrt(w[:, 1] / total) * _half_normal(u[:, 2])
                 - np.sqrt(w[:, 0] / total) * _half_normal(u[:, 3]))
            return 4.0 * centered_bvn(a1 * z, a2 * z, r) - 1.0

        return _result(Measure.KENDALL_TAU, integrate(integrand, 4, self.cfg), method)

    def spearman_msn(self, rho, alpha, mixing_spec, method=None):
        """
        Spearman's rho of an MSN copula.

        THM_EXPECTATION: 96 E Phi_5(0; P_S(rho, delta, V)) - 3 with
        V_i = sqrt(W_i/(W_i+W_3)), V_i^- = -sqrt(W_3/(W_i+W_3)) and
        V_3 = W_3 / sqrt((W_1+W_3)(W_2+W_3)); deterministic (c, c, -c, -c, c^2)
        for degenerate mixing.
        COR_BIVARIATE: 12 E Phi_2(a1' Z1, a2' Z2; rho' V3) - 3 with
        Z_i = V_i Y_i + V_i^- Y_3.

        Args:
            rho: Pseudo-correlation in [-1, 1]
            alpha: Skewness pair
            mixing_spec: MixingSpec
            method: Evaluation path, defaults to the calculator's

        Returns:
            RankResult; rho = +/-1 returns +/-1 exactly
        """
        rho = _check_rho(rho)
        alpha = _pair(alpha, 'alpha')
        method = self._method(method)
        if abs(rho) == 1.0:
            return _exact(Measure.SPEARMAN_RHO, rho)
        if alpha == (0.0, 0.0):
            if mixing_spec.is_degenerate:
                return _exact(Measure.SPEARMAN_RHO, gaussian_spearman(rho))
            return self._elliptical_spearman(rho, mixing_spec)

        derived = derived_skew(rho, alpha)
        if method is Method.THM_EXPECTATION:
            if mixing_spec.is_degenerate:
                P = build_p_s(rho, derived.delta, (_C, _C, -_C, -_C, 0.5))
                estimate = orthant_prob(P, self.cfg)
            else:
                def matrices(u):
                    w = mixing.quantile(mixing_spec, u)
                    s1 = w[:, 0] + w[:, 2]
                    s2 = w[:, 1] + w[:, 2]
                    return p_s_batch(boundary_rho(rho), derived.delta,
                                     np.sqrt(w[:, 0] / s1), np.sqrt(w[:, 1] / s2),
                                     -np.sqrt(w[:, 2] / s1), -np.sqrt(w[:, 2] / s2),
                                     w[:, 2] / np.sqrt(s1 * s2))

                estimate = orthant_expectation(matrices, 3, 5, self.cfg)
            return _result(Measure.SPEARMAN_RHO, estimate.affine(96.0, -3.0), method)

        a1, a2 = derived.alpha_dagger
        r = derived.rho_dagger
        if mixing_spec.is_degenerate:
            def integrand(u):
                y3 = _half_normal(u[:, 2])
                z1 = _C * (_half_normal(u[:, 0]) - y3)
                z2 = _C * (_half_normal(u[:, 1]) - y3)
                return 12.0 * centered_bvn(a1 * z1, a2 * z2, 0.5 * r) - 3.0

            estimate = integrate(symmetrized(integrand, (1, 0, 2)), 3, self.cfg)
            return _result(Measure.SPEARMAN_RHO, estimate, method)

        def integrand(u):
            w = mixing.quantile(mixing_spec, u[:, :3])
            s1 = w[:, 0] + w[:, 2]
            s2 = w[:, 1] + w[:, 2]
            y3 = _half_normal(u[:, 5])
            z1 = np.sqrt(w[:, 0] / s1) * _half_normal(u[:, 3]) - np.sqrt(w[:, 2] / s1) * y3
            z2 = np.sqrt(w[:, 1] / s2) * _half_normal(u[:, 4]) - np.sqrt(w[:, 2] / s2) * y3
            v3 = w[:, 2] / np.sqrt(s1 * s2)
            return 12.0 * centered_bvn(a1 * z1, a2 * z2, r * v3) - 3.0

        estimate = integrate(symmetrized(integrand, (1, 0, 2, 4, 3, 5)), 6, self.cfg)
        return _result(Measure.SPEARMAN_RHO, estimate, method)

    def skew_normal_rankcorr(self, rho, alpha, measure, method=Method.THM_EXPECTATION):
        """
        Rank correlation of the skew-normal copula.

        The default path is a single orthant probability with deterministic
        mixing weights; COR_BIVARIATE uses Z = (Y1 - Y2)/sqrt(2) for Kendall
        and Z_i = (Y_i - Y3)/sqrt(2) with rho'/2 for Spearman.

        Args:
            rho: Pseudo-correlation in [-1, 1]
            alpha: Skewness pair
            measure: Measure
            method: THM_EXPECTATION (orthant) or COR_BIVARIATE (cross-check)

        Returns:
            RankResult
        """
        if measure is Measure.KENDALL_TAU:
            return self.kendall_msn(rho, alpha, mixing.DEGENERATE, method)
        return self.spearman_msn(rho, alpha, mixing.DEGENERATE, method)

    # ----- dispatch -----

    def rank_correlation(self, spec, measure, method=None):
        """
        Route a CopulaSpec to the matching formula.

        Args:
            spec: CopulaSpec
            measure: Measure
            method: MSN evaluation path override

        Returns:
            RankResult recording the method that produced the value
        """
        if not isinstance(spec, CopulaSpec):
            raise DomainError(f"Expected a CopulaSpec, got {spec!r}")
        if spec.family is Family.MN:
            if measure is Measure.KENDALL_TAU:
                return self.kendall_mn(spec.rho, spec.skew, spec.mixing)
            return self.spearman_mn(spec.rho, spec.skew, spec.mixing)
        if measure is Measure.KENDALL_TAU:
            return self.kendall_msn(spec.rho, spec.skew, spec.mixing, method)
        return self.spearman_msn(spec.rho, spec.skew, spec.mixing, method)

    def compare_on_shared_nodes(self, spec_a, spec_b, measure, method=None):
        """
        Evaluate two specs on identical QMC nodes.

        Structural identities (component swaps, sign flips) then hold to
        rounding error instead of statistical tolerance.

        Returns:
            Dictionary with both results and their difference
        """
        first = self.rank_correlation(spec_a, measure, method)
        second = self.rank_correlation(spec_b, measure, method)
        return {
            'first': first,
            'second': second,
            'difference': first.raw_value - second.raw_value,
        }


def rank_correlation(spec, measure, cfg=None, method=None):
    """Module-level shortcut for RankCorrelationCalculator(cfg).rank_correlation."""
    return RankCorrelationCalculator(cfg).rank_correlation(spec, measure, method)
