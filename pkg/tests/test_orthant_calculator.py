import math

import numpy as np
import pytest

from modules.errors import DomainError, MatrixError
from modules.orthant.orthant_calculator import (
    CorrMatrix,
    boundary_rho,
    build_p_tau,
    build_p_s,
    p_tau_batch,
    semidefinite_cholesky,
    genz_order,
    orthant_prob
)
from modules.qmc.qmc_integrator import QmcConfig

C = 1.0 / math.sqrt(2.0)
BASE_4 = np.array([
    [1.0, 0.3, 0.2, 0.1],
    [0.3, 1.0, 0.1, 0.2],
    [0.2, 0.1, 1.0, 0.25],
    [0.1, 0.2, 0.25, 1.0],
])


def equicorrelated(d, r):
    return np.full((d, d), r) + (1.0 - r) * np.eye(d)


def with_entry(P, i, j, value):
    P = P.copy()
    P[i, j] = P[j, i] = value
    return P


def test_corr_matrix_validation():
    with pytest.raises(MatrixError):
        CorrMatrix(np.ones((2, 3)))
    with pytest.raises(MatrixError):
        CorrMatrix(np.eye(6))
    with pytest.raises(MatrixError):
        CorrMatrix([[1.0, 0.3], [0.2, 1.0]])
    with pytest.raises(MatrixError):
        CorrMatrix([[2.0, 0.0], [0.0, 1.0]])
    with pytest.raises(MatrixError):
        CorrMatrix([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]])


def test_corr_matrix_is_read_only():
    P = CorrMatrix(np.eye(3))
    with pytest.raises(ValueError):
        P.entries[0, 1] = 0.5


def test_p_tau_identity_without_coupling():
    np.testing.assert_array_equal(build_p_tau(0.0, (0.0, 0.0), (C, -C)).entries, np.eye(4))


def test_p_tau_placement():
    P = build_p_tau(0.3, (0.2, -0.1), (C, -C)).entries
    assert P[0, 1] == 0.3
    assert P[2, 0] == pytest.approx(0.2 * C)
    assert P[2, 1] == pytest.approx(-0.1 * C)
    assert P[3, 0] == pytest.approx(-0.2 * C)
    assert P[3, 1] == pytest.approx(0.1 * C)
    assert P[3, 2] == 0.0
    np.testing.assert_array_equal(P, P.T)


def test_p_s_identity_and_skew_normal_layout():
    np.testing.assert_array_equal(build_p_s(0.0, (0.0, 0.0), (C, C, -C, -C, 0.5)).entries, np.eye(5))

    P = build_p_s(0.4, (0.5, 0.3), (C, C, -C, -C, 0.5)).entries
    assert P[1, 0] == pytest.approx(0.2)
    assert P[2, 0] == pytest.approx(0.5 * C)
    assert P[3, 1] == pytest.approx(0.3 * C)
    assert P[4, 0] == pytest.approx(-0.5 * C)
    assert P[4, 1] == pytest.approx(-0.3 * C)
    assert P[2, 1] == P[3, 0] == P[4, 2] == P[4, 3] == P[3, 2] == 0.0


@pytest.mark.parametrize("rho,delta", [(0.3, (0.2, -0.1)), (0.9, (0.6, 0.55)), (-0.7, (0.5, -0.5))])
def test_layouts_are_positive_semidefinite(rho, delta):
    for P in (build_p_tau(rho, delta, (C, -C)), build_p_s(rho, delta, (C, C, -C, -C, 0.5))):
        assert np.linalg.eigvalsh(P.entries).min() >= -1e-10


def test_delta_must_be_inside_unit_interval():
    with pytest.raises(DomainError):
        build_p_tau(0.0, (1.0, 0.0), (C, -C))


def test_boundary_rho():
    assert boundary_rho(0.5) == 0.5
    assert boundary_rho(1.0) < 1.0
    assert boundary_rho(-1.0) == -boundary_rho(1.0)
    with pytest.raises(DomainError):
        boundary_rho(1.5)


def test_semidefinite_cholesky_handles_zero_pivots():
    P = np.ones((3, 3))
    L = semidefinite_cholesky(P)
    np.testing.assert_allclose(L @ L.T, P, atol=1e-14)
    np.testing.assert_array_equal(L[:, 0], np.ones(3))


def test_semidefinite_cholesky_batch():
    stack = p_tau_batch(0.5, (0.3, 0.2), np.array([C, 0.6]), np.array([-C, -0.8]))
    L = semidefinite_cholesky(stack)
    np.testing.assert_allclose(np.einsum('nij,nkj->nik', L, L), stack, atol=1e-14)


def test_semidefinite_cholesky_rejects_indefinite():
    with pytest.raises(MatrixError):
        semidefinite_cholesky(np.array([[1.0, 0.9, -0.9], [0.9, 1.0, 0.9], [-0.9, 0.9, 1.0]]))


def test_two_dimensional_orthant_is_exact():
    estimate = orthant_prob([[1.0, 0.5], [0.5, 1.0]])
    assert estimate.value == pytest.approx(1.0 / 3.0, abs=1e-15)
    assert estimate.std_error == 0.0


@pytest.mark.parametrize("d", [3, 4, 5])
def test_independent_orthant(d):
    assert orthant_prob(np.eye(d), QmcConfig(points=64, replicates=2)).value == pytest.approx(0.5 ** d, abs=1e-15)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_equicorrelated_half(d):
    # with correlation 1/2 every ordering of d+1 exchangeable normals is equally likely
    estimate = orthant_prob(equicorrelated(d, 0.5), QmcConfig(points=2 ** 12, replicates=4))
    assert estimate.value == pytest.approx(1.0 / (d + 1), abs=max(3.0 * estimate.std_error, 5e-4))


def test_three_dimensional_arcsine_formula():
    P = np.array([[1.0, 0.3, -0.4], [0.3, 1.0, 0.2], [-0.4, 0.2, 1.0]])
    expected = 0.125 + (math.asin(0.3) + math.asin(-0.4) + math.asin(0.2)) / (4.0 * math.pi)
    estimate = orthant_prob(P, QmcConfig(points=2 ** 12, replicates=4))
    assert estimate.value == pytest.approx(expected, abs=max(3.0 * estimate.std_error, 5e-4))


def test_singular_matrix():
    # all components identical: P(X < 0) = 1/2
    estimate = orthant_prob(np.ones((4, 4)), QmcConfig(points=256, replicates=2))
    assert estimate.value == pytest.approx(0.5, abs=1e-12)


def test_reordering_does_not_change_the_value():
    P = build_p_tau(0.6, (0.5, 0.4), (0.6, -0.8))
    cfg = QmcConfig(points=2 ** 12, replicates=4)
    reordered = orthant_prob(P, cfg)
    plain = orthant_prob(P, cfg, reorder=False)
    assert reordered.value == pytest.approx(plain.value, abs=3.0 * (reordered.std_error + plain.std_error) + 2e-4)


def test_genz_order_is_a_permutation():
    order = genz_order(build_p_s(0.4, (0.5, 0.3), (C, C, -C, -C, 0.5)))
    assert sorted(order) == list(range(5))
    assert genz_order(CorrMatrix(np.eye(3))) == [0, 1, 2]


@pytest.mark.parametrize("i,j", [(0, 1), (1, 3), (2, 3)])
def test_orthant_probability_increases_with_each_correlation(i, j):
    cfg = QmcConfig(points=2 ** 12, replicates=4)
    values = [orthant_prob(with_entry(BASE_4, i, j, r), cfg, reorder=False).value
              for r in (-0.4, -0.2, 0.0, 0.2, 0.4)]
    assert np.all(np.diff(values) > 0.0)


@pytest.mark.parametrize("P", [BASE_4, build_p_s(0.4, (0.5, 0.3), (C, C, -C, -C, 0.5)).entries])
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_orthant_probability_is_permutation_invariant(P, seed):
    cfg = QmcConfig(points=2 ** 12, replicates=4)
    order = np.random.default_rng(seed).permutation(P.shape[0])
    original = orthant_prob(P, cfg)
    permuted = orthant_prob(P[np.ix_(order, order)], cfg)
    tolerance = 3.0 * (original.std_error + permuted.std_error) + 1e-4
    assert permuted.value == pytest.approx(original.value, abs=tolerance)


def test_derivative_in_one_correlation_matches_conditional_orthant():
    # d/drho of the orthant probability is phi_2(0, 0; rho) times the orthant
    # probability of (X3, X4) given X1 = X2 = 0
    rho, h = 0.3, 0.05
    cfg = QmcConfig(points=2 ** 12, replicates=8)
    upper = orthant_prob(with_entry(BASE_4, 0, 1, rho + h), cfg, reorder=False)
    lower = orthant_prob(with_entry(BASE_4, 0, 1, rho - h), cfg, reorder=False)
    slope = (upper.value - lower.value) / (2.0 * h)

    P = with_entry(BASE_4, 0, 1, rho)
    schur = P[2:, 2:] - P[2:, :2] @ np.linalg.solve(P[:2, :2], P[:2, 2:])
    conditional = schur[0, 1] / math.sqrt(schur[0, 0] * schur[1, 1])
    expected = (0.25 + math.asin(conditional) / (2.0 * math.pi)) / (2.0 * math.pi * math.sqrt(1.0 - rho * rho))

    tolerance = 5.0 * (upper.std_error + lower.std_error) / (2.0 * h) + 1e-4
    assert slope == pytest.approx(expected, abs=tolerance)
