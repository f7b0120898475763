import math

import numpy as np
import pytest

from modules.errors import DomainError, TieError
from modules.mixing import mixing_distribution as mixing
from modules.qmc.qmc_integrator import QmcConfig
from modules.rankcorr.copula_spec import CopulaSpec, Family, Measure
from modules.rankcorr.rank_correlation import RankCorrelationCalculator
from modules.sampler.copula_sampler import RngState, Sample, sample_mn
from modules.sampler.empirical import (
    check_ties,
    empirical_kendall,
    kendall_reference,
    empirical_spearman,
    oracle_check,
    read_csv_sample
)


def test_perfect_agreement_and_disagreement():
    x = np.arange(10.0)
    concordant = Sample(np.column_stack([x, x ** 3]))
    discordant = Sample(np.column_stack([x, -x]))
    assert empirical_kendall(concordant) == pytest.approx(1.0)
    assert empirical_spearman(concordant) == pytest.approx(1.0)
    assert empirical_kendall(discordant) == pytest.approx(-1.0)
    assert empirical_spearman(discordant) == pytest.approx(-1.0)


def test_small_example():
    s = Sample([[1.0, 2.0], [2.0, 1.0], [3.0, 4.0], [4.0, 3.0]])
    assert empirical_kendall(s) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert kendall_reference(s) == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert empirical_spearman(s) == pytest.approx(0.6, abs=1e-12)


def test_ties_are_rejected():
    s = Sample([[1.0, 1.0], [2.0, 1.0], [3.0, 2.0]])
    with pytest.raises(TieError) as excinfo:
        empirical_spearman(s)
    assert excinfo.value.coordinate == 2
    with pytest.raises(TieError):
        check_ties(Sample([[1.0, 5.0], [1.0, 6.0]]))


def test_invariance_under_swap_and_monotone_transform():
    s = sample_mn(0.4, (1.0, -1.0), mixing.DEGENERATE, 2000, RngState(4))
    transformed = Sample(np.column_stack([np.exp(s.x[:, 0]), s.x[:, 1] ** 3]))
    for statistic in (empirical_kendall, empirical_spearman):
        assert statistic(s.swapped()) == pytest.approx(statistic(s), abs=1e-12)
        assert statistic(transformed) == pytest.approx(statistic(s), abs=1e-12)


def test_fast_kendall_matches_pairwise_count():
    s = sample_mn(-0.3, (0.0, 0.0), mixing.DEGENERATE, 500, RngState(8))
    assert empirical_kendall(s) == pytest.approx(kendall_reference(s), abs=1e-12)


def test_pairwise_count_size_limit():
    s = sample_mn(0.0, (0.0, 0.0), mixing.DEGENERATE, 2001, RngState(8))
    with pytest.raises(DomainError):
        kendall_reference(s)


def test_oracle_recovers_gaussian_tau():
    spec = CopulaSpec(Family.MN, 0.5, (0.0, 0.0), mixing.DEGENERATE)
    estimate, se = oracle_check(spec, Measure.KENDALL_TAU, 2000, 10, RngState(12))
    assert se > 0.0
    assert estimate == pytest.approx(1.0 / 3.0, abs=max(4.0 * se, 0.015))


def test_oracle_is_reproducible():
    spec = CopulaSpec(Family.MSN, 0.4, (2.0, 1.0), mixing.ig_from_dof(4.0))
    first = oracle_check(spec, Measure.SPEARMAN_RHO, 1000, 10, RngState(3))
    assert oracle_check(spec, Measure.SPEARMAN_RHO, 1000, 10, RngState(3)) == first


def test_oracle_limits():
    spec = CopulaSpec(Family.MN, 0.5, (0.0, 0.0), mixing.DEGENERATE)
    with pytest.raises(DomainError):
        oracle_check(spec, Measure.KENDALL_TAU, 999, 10, RngState(0))
    with pytest.raises(DomainError):
        oracle_check(spec, Measure.KENDALL_TAU, 1000, 9, RngState(0))


def test_read_csv_with_and_without_header(tmp_path):
    plain = tmp_path / 'plain.csv'
    plain.write_text("1.5,2.0\n-0.3,4.1\n2.2,-1.0\n")
    np.testing.assert_array_equal(read_csv_sample(plain).x, [[1.5, 2.0], [-0.3, 4.1], [2.2, -1.0]])

    headed = tmp_path / 'headed.csv'
    headed.write_text("x,y\n1.5,2.0\n-0.3,4.1\n")
    assert read_csv_sample(headed).n == 2


@pytest.mark.parametrize("content", [
    "1.0\n2.0\n3.0\n",
    "1.0,2.0,3.0\n4.0,5.0,6.0\n",
    "1.0,2.0\nabc,3.0\n4.0,5.0\n",
    "",
])
def test_read_csv_rejects_bad_files(tmp_path, content):
    path = tmp_path / 'bad.csv'
    path.write_text(content)
    with pytest.raises(DomainError):
        read_csv_sample(path)


def test_read_csv_missing_file(tmp_path):
    with pytest.raises(DomainError):
        read_csv_sample(tmp_path / 'missing.csv')


@pytest.mark.slow
@pytest.mark.parametrize("measure", list(Measure))
@pytest.mark.parametrize("spec", [
    CopulaSpec(Family.MN, 0.3, (1.0, 2.0), mixing.ig_from_dof(4.0)),
    CopulaSpec(Family.MN, -0.5, (1.0, 1.0), mixing.ig_from_dof(10.0)),
    CopulaSpec(Family.MSN, 0.4, (2.0, 1.0), mixing.ig_from_dof(4.0)),
    CopulaSpec(Family.MSN, 0.5, (3.0, 0.0), mixing.DEGENERATE),
])
def test_oracle_agrees_with_skewed_formulas(spec, measure):
    analytic = RankCorrelationCalculator(QmcConfig(points=2 ** 12, replicates=8)).rank_correlation(spec, measure)
    empirical, se = oracle_check(spec, measure, 4000, 10, RngState(2024))
    assert abs(analytic.value - empirical) <= max(4.0 * math.hypot(se, analytic.std_error), 0.01)
