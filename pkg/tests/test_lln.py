import math

import numpy as np
import pytest

from frechet_pd import PersistenceDiagram, oracle_global_mean
from frechet_pd.lln import (
    DiracMixture, SampleCounts, empirical_mean_from_counts, lln_bound, lln_experiment,
    loglog_slope, sample_counts,
)

P = PersistenceDiagram
MIX = DiracMixture([P([(0, 2)]), P([(0, 4)])])
Y = P([(0, 3)])


def test_degenerate_multinomial():
    m = DiracMixture([P([(0, 1)])])
    assert sample_counts(m, 17, seed=5).counts == (17,)


def test_counts_concentrate():
    c = sample_counts(MIX, 10**6, seed=2024)
    assert c.n == 10**6
    assert all(abs(k - 500_000) <= 1500 for k in c.counts)


def test_count_means_over_seeds():
    m4 = DiracMixture([P([(0, k + 1)]) for k in range(4)])
    first = [sample_counts(m4, 100, seed=s).counts[0] for s in range(10**4)]
    assert np.mean(first) == pytest.approx(25, abs=0.5)


def test_counts_reproducible_and_validated():
    assert sample_counts(MIX, 50, seed=9) == sample_counts(MIX, 50, seed=9)
    with pytest.raises(ValueError):
        sample_counts(MIX, 0)
    with pytest.raises(ValueError):
        DiracMixture([])


def test_empirical_mean_examples():
    r = empirical_mean_from_counts(MIX, SampleCounts((50, 50)), Y)
    assert r.mean == Y and r.iterations == 1
    r = empirical_mean_from_counts(MIX, SampleCounts((1, 0)), Y)
    assert r.mean == P([(0, 2)]) and r.frechet_value == 0
    r = empirical_mean_from_counts(MIX, SampleCounts((3, 1)), Y)
    assert r.mean == P([(0, 2.5)])
    assert oracle_global_mean([P([(0, 2)])] * 3 + [P([(0, 4)])]).mean == P([(0, 2.5)])
    with pytest.raises(ValueError):
        empirical_mean_from_counts(MIX, SampleCounts((0, 0)), Y)


def test_bound_arithmetic():
    assert lln_bound(2, 1.0, 100, 0.1) == pytest.approx(0.04 * math.log(20))
    assert round(lln_bound(2, 1.0, 100, 0.1), 5) == 0.11983


def test_experiment_small():
    rep = lln_experiment(MIX, Y, 100, 0.1, 300, seed=1)
    assert rep.bound == pytest.approx(0.11983, abs=1e-5)
    assert rep.coverage >= 0.9
    assert rep.certificate_failures == 0 and rep.closed_form_mismatches == 0
    assert rep == lln_experiment(MIX, Y, 100, 0.1, 300, seed=1)


def test_experiment_parallel_is_identical():
    a = lln_experiment(MIX, Y, 100, 0.1, 40, seed=3)
    b = lln_experiment(MIX, Y, 100, 0.1, 40, seed=3, jobs=2)
    assert a == b


def test_single_atom_has_no_spread():
    m1 = DiracMixture([P([(0, 2), (1, 4)])])
    rep = lln_experiment(m1, P([(0, 2), (1, 4)]), 50, 0.1, 20, seed=0)
    assert rep.coverage == 1.0 and rep.max_d_squared == 0.0


def test_preconditions():
    with pytest.raises(ValueError, match="8 m ln"):
        lln_experiment(MIX, Y, 40, 0.1, 10)
    with pytest.raises(ValueError, match="local minimum"):
        lln_experiment(MIX, P([(0, 2)]), 100, 0.1, 10)


def test_slope_fit():
    assert loglog_slope([1, 10, 100], [1, 0.1, 0.01]) == pytest.approx(-1)
