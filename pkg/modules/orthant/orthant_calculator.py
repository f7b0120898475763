"""
Zero-orthant probabilities P(X < 0) for X ~ N(0, P) and the correlation
matrices whose orthant probabilities give the skew-normal mixture rank
correlations.

Dimension 2 is closed form. Higher dimensions use Genz's separation of
variables: factor P = L L^T, then integrate the product of sequential
conditional probabilities over (0, 1)^(d-1) with the QMC driver.
"""

import math
import logging

import numpy as np
from scipy import special

from config.copula_constants import (
    PSD_TOLERANCE,
    BOUNDARY_RHO,
    CHOLESKY_PIVOT_FLOOR,
    CHOLESKY_NEGATIVE_TOL,
    QUANTILE_CLIP,
    MAX_ORTHANT_DIM
)
from modules.errors import DomainError, MatrixError
from modules.qmc.qmc_integrator import QmcConfig, QmcEstimate, integrate

logger = logging.getLogger(__name__)

_SYMMETRY_TOL = 1e-12


class CorrMatrix:
    """
    Validated correlation matrix.

    Symmetric with unit diagonal; eigenvalues down to -PSD_TOLERANCE are
    clipped to zero and the diagonal is restored, anything more negative is
    rejected.
    """

    def __init__(self, entries):
        entries = np.array(entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise MatrixError(f"Correlation matrix must be square, got shape {entries.shape}")
        if not 2 <= entries.shape[0] <= MAX_ORTHANT_DIM:
            raise MatrixError(f"Correlation matrix dimension must be 2..{MAX_ORTHANT_DIM}, got {entries.shape[0]}")
        if not np.all(np.isfinite(entries)):
            raise MatrixError("Correlation matrix has non-finite entries")
        if np.max(np.abs(entries - entries.T)) > _SYMMETRY_TOL:
            raise MatrixError("Correlation matrix is not symmetric")
        if np.max(np.abs(np.diag(entries) - 1.0)) > _SYMMETRY_TOL:
            raise MatrixError("Correlation matrix must have a unit diagonal")

        eigenvalues, eigenvectors = np.linalg.eigh(entries)
        smallest = float(eigenvalues[0])
        if smallest < -PSD_TOLERANCE:
            logger.error(f"Correlation matrix has eigenvalue {smallest:.3e}")
            raise MatrixError(f"Correlation matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
        if smallest < 0.0:
            logger.warning(f"Clipping eigenvalue {smallest:.3e} to zero")
            clipped = (eigenvectors * np.maximum(eigenvalues, 0.0)) @ eigenvectors.T
            scale = 1.0 / np.sqrt(np.diag(clipped))
            entries = clipped * np.outer(scale, scale)
            entries = 0.5 * (entries + entries.T)
            np.fill_diagonal(entries, 1.0)

        entries.setflags(write=False)
        self.entries = entries

    @property
    def dim(self):
        return self.entries.shape[0]

    def permuted(self, order):
        """Matrix of the reordered vector X[order]."""
        order = list(order)
        return CorrMatrix(self.entries[np.ix_(order, order)])


def boundary_rho(rho):
    if not abs(rho) <= 1.0:
        raise DomainError(f"Correlation must lie in [-1, 1], got {rho}")
    if abs(rho) > BOUNDARY_RHO:
        logger.debug(f"Perturbing rho={rho} to {math.copysign(BOUNDARY_RHO, rho)}")
        return math.copysign(BOUNDARY_RHO, rho)
    return float(rho)


def _check_delta(delta):
    d1, d2 = (float(d) for d in delta)
    if not (abs(d1) < 1.0 and abs(d2) < 1.0):
        raise DomainError(f"Skewness components delta must satisfy |delta_i| < 1, got {delta}")
    return d1, d2


def build_p_tau(rho, delta, v):
    """
    4 x 4 matrix whose zero-orthant probability gives Kendall's tau.

    Layout (lower triangle): row 2 = (rho, 1); row 3 = (d1 v1, d2 v1, 1);
    row 4 = (d1 v2, d2 v2, 0, 1).

    Args:
        rho: Pseudo-correlation in [-1, 1]
        delta: (delta_1, delta_2), each strictly inside (-1, 1)
        v: (v1, v2) with v1^2 + v2^2 = 1

    Returns:
        CorrMatrix
    """
    return CorrMatrix(p_tau_batch(boundary_rho(rho), _check_delta(delta),
                                  np.asarray([v[0]], dtype=float), np.asarray([v[1]], dtype=float))[0])


def build_p_s(rho, delta, v):
    """
    5 x 5 matrix whose zero-orthant probability gives Spearman's rho.

    Layout (lower triangle): row 2 = (rho v3, 1); row 3 = (d1 v1, 0, 1);
    row 4 = (0, d2 v2, 0, 1); row 5 = (d1 v1m, d2 v2m, 0, 0, 1).

    Args:
        rho: Pseudo-correlation in [-1, 1]
        delta: (delta_1, delta_2), each strictly inside (-1, 1)
        v: (v1, v2, v1m, v2m, v3)

    Returns:
        CorrMatrix
    """
    columns = [np.asarray([component], dtype=float) for component in v]
    return CorrMatrix(p_s_batch(boundary_rho(rho), _check_delta(delta), *columns)[0])


def p_tau_batch(rho, delta, v1, v2):
    """Stack of Kendall matrices, one per (v1, v2) pair; no validation."""
    d1, d2 = delta
    n = len(v1)
    P = np.broadcast_to(np.eye(4), (n, 4, 4)).copy()
    P[:, 0, 1] = P[:, 1, 0] = rho
    P[:, 2, 0] = P[:, 0, 2] = d1 * v1
    P[:, 2, 1] = P[:, 1, 2] = d2 * v1
    P[:, 3, 0] = P[:, 0, 3] = d1 * v2
    P[:, 3, 1] = P[:, 1, 3] = d2 * v2
    return P


def p_s_batch(rho, delta, v1, v2, v1m, v2m, v3):
    """Stack of Spearman matrices, one per node; no validation."""
    d1, d2 = delta
    n = len(v1)
    P = np.broadcast_to(np.eye(5), (n, 5, 5)).copy()
    P[:, 1, 0] = P[:, 0, 1] = rho * v3
    P[:, 2, 0] = P[:, 0, 2] = d1 * v1
    P[:, 3, 1] = P[:, 1, 3] = d2 * v2
    P[:, 4, 0] = P[:, 0, 4] = d1 * v1m
    P[:, 4, 1] = P[:, 1, 4] = d2 * v2m
    return P


def semidefinite_cholesky(P):
    """
    Lower Cholesky factor of one or a stack of PSD matrices.

    Zero pivots are allowed; the column below such a pivot is set to zero.

    Args:
        P: Array of shape (d, d) or (n, d, d)

    Returns:
        L with the same shape as P and L L^T = P

    Raises:
        MatrixError: if a Schur-complement diagonal is clearly negative
    """
    P = np.asarray(P, dtype=float)
    L = np.zeros_like(P)
    d = P.shape[-1]
    for j in range(d):
        row = L[..., j, :j]
        diag = P[..., j, j] - np.sum(row * row, axis=-1)
        if np.any(diag < -CHOLESKY_NEGATIVE_TOL):
            raise MatrixError(f"Cholesky factorization failed at pivot {j} (diagonal {np.min(diag):.3e})")
        pivot = np.sqrt(np.maximum(diag, 0.0))
        L[..., j, j] = pivot
        if j + 1 < d:
            below = P[..., j + 1:, j] - np.einsum('...ik,...k->...i', L[..., j + 1:, :j], row)
            safe = np.where(pivot > CHOLESKY_PIVOT_FLOOR, pivot, 1.0)
            L[..., j + 1:, j] = np.where((pivot > CHOLESKY_PIVOT_FLOOR)[..., None],
                                         below / safe[..., None], 0.0)
    return L


def _conditional_probability(numerator, pivot):
    """Phi(numerator / pivot), with a zero pivot giving the step function."""
    safe = np.where(pivot > CHOLESKY_PIVOT_FLOOR, pivot, 1.0)
    step = np.where(numerator > 0.0, 1.0, np.where(numerator < 0.0, 0.0, 0.5))
    return np.where(pivot > CHOLESKY_PIVOT_FLOOR, special.ndtr(numerator / safe), step)


def genz_orthant(L, w):
    """
    Genz separation-of-variables integrand for P(L Y < 0).

    Args:
        L: Cholesky factor, shape (d, d) or (n, d, d)
        w: Uniforms of shape (n, d - 1)

    Returns:
        Array of n conditional-probability products; their mean over uniform
        w is the orthant probability
    """
    n = w.shape[0]
    d = L.shape[-1]
    L = np.broadcast_to(L, (n, d, d))
    y = np.zeros((n, d))
    product = np.ones(n)
    for i in range(d):
        offset = np.einsum('nj,nj->n', L[:, i, :i], y[:, :i])
        conditional = _conditional_probability(-offset, L[:, i, i])
        product *= conditional
        if i < d - 1:
            y[:, i] = special.ndtri(np.maximum(w[:, i] * conditional, QUANTILE_CLIP))
    return product


def genz_order(P):
    """
    Variable order for the Genz recursion: at each step take the remaining
    variable with the smallest conditional probability of lying below zero,
    given the earlier ones at their truncated conditional means. Ties go to
    the lower original index.

    Args:
        P: CorrMatrix

    Returns:
        List of original indices in integration order
    """
    C = np.array(P.entries)
    d = C.shape[0]
    order = list(range(d))
    L = np.zeros((d, d))
    y = np.zeros(d)
    for i in range(d):
        best, best_prob = None, None
        for j in range(i, d):
            offset = L[j, :i] @ y[:i]
            variance = C[j, j] - L[j, :i] @ L[j, :i]
            prob = float(_conditional_probability(-offset, math.sqrt(max(variance, 0.0))))
            if best is None or prob < best_prob - 1e-14 or (abs(prob - best_prob) <= 1e-14
                                                             and order[j] < order[best]):
                best, best_prob = j, prob
        if best != i:
            C[[i, best]] = C[[best, i]]
            C[:, [i, best]] = C[:, [best, i]]
            L[[i, best]] = L[[best, i]]
            order[i], order[best] = order[best], order[i]

        pivot = math.sqrt(max(C[i, i] - L[i, :i] @ L[i, :i], 0.0))
        L[i, i] = pivot
        if pivot > CHOLESKY_PIVOT_FLOOR:
            for k in range(i + 1, d):
                L[k, i] = (C[k, i] - L[k, :i] @ L[i, :i]) / pivot
        limit = -(L[i, :i] @ y[:i]) / pivot if pivot > CHOLESKY_PIVOT_FLOOR else 0.0
        mass = special.ndtr(limit)
        # mean of a standard normal truncated to (-inf, limit]
        y[i] = -math.exp(-0.5 * limit * limit) / math.sqrt(2.0 * math.pi) / max(mass, QUANTILE_CLIP)
    return order


def orthant_prob(P, cfg=None, reorder=True):
    """
    Zero-orthant probability P(X < 0 componentwise) for X ~ N(0, P).

    Args:
        P: CorrMatrix or array-like correlation matrix
        cfg: QmcConfig for the Genz integral
        reorder: Apply the Genz variable reordering before factorizing

    Returns:
        QmcEstimate; dimension 2 is exact with std_error 0
    """
    if not isinstance(P, CorrMatrix):
        P = CorrMatrix(P)
    cfg = cfg or QmcConfig()

    if P.dim == 2:
        rho = float(np.clip(P.entries[0, 1], -1.0, 1.0))
        return QmcEstimate(0.25 + math.asin(rho) / (2.0 * math.pi), 0.0, 0)

    if reorder:
        order = genz_order(P)
        if order != sorted(order):
            logger.debug(f"Genz order {order}")
            P = P.permuted(order)
    L = semidefinite_cholesky(P.entries)
    return integrate(lambda w: genz_orthant(L, w), P.dim - 1, cfg)


def orthant_expectation(matrices, outer_dim, d, cfg=None):
    """
    E_V[Phi_d(0; P(V))] where V is a function of outer_dim uniforms.

    The outer mixing integral and the inner Genz integral are flattened into
    one QMC layer of dimension outer_dim + d - 1; each node carries its own
    matrix. No variable reordering is applied.

    Args:
        matrices: Callable mapping an (n, outer_dim) array to an (n, d, d) stack
        outer_dim: Number of uniforms consumed by the matrix construction
        d: Matrix dimension
        cfg: QmcConfig

    Returns:
        QmcEstimate
    """
    def integrand(u):
        L = semidefinite_cholesky(matrices(u[:, :outer_dim]))
        return genz_orthant(L, u[:, outer_dim:])

    return integrate(integrand, outer_dim + d - 1, cfg)
