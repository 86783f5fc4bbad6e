import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import diagrams, random_diagram
from frechet_pd import (
    DIAGONAL, CapacityError, DiagramPoint, PersistenceDiagram, compute_mean, distance,
    frechet_function, local_minima_bound, local_minimum_certificate, mean_of_matched,
    multi_restart_mean, oracle_global_mean,
)

P = PersistenceDiagram
TWO = [P([(0, 2)]), P([(0, 4)])]
SQUARE = [P([(1, 3), (2, 4)]), P([(1, 4), (2, 3)])]


def test_frechet_function_examples():
    assert frechet_function(P([(0, 3)]), TWO) == pytest.approx(1.0)
    assert frechet_function(TWO[0], [TWO[0]]) == 0
    assert frechet_function(P.empty(), [P([(1, 3)])]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        frechet_function(P.empty(), [])


def test_mean_of_matched_examples():
    assert mean_of_matched([DiagramPoint(0, 2), DiagramPoint(0, 4)], 2) == DiagramPoint(0, 3)
    assert mean_of_matched([DiagramPoint(0, 2), DIAGONAL], 2) == DiagramPoint(0.5, 1.5)
    assert mean_of_matched([DIAGONAL, DIAGONAL], 2) is DIAGONAL
    with pytest.raises(ValueError):
        mean_of_matched([])


def test_compute_mean_examples():
    r = compute_mean(TWO, init=P([(0, 2)]))
    assert r.mean == P([(0, 3)]) and r.frechet_value == pytest.approx(1.0)
    assert r.iterations == 2 and r.converged and r.certificate.verified
    r = compute_mean([P([(0, 0.2)]), P.empty()], init=P([(0, 0.2)]))
    assert np.allclose(r.mean.points, [[0.05, 0.15]])
    assert r.frechet_value == pytest.approx(0.005)
    D = P([(0, 1), (2, 5)])
    for init in ("random_input", "midpoint", P([(0, 9)])):
        r = compute_mean([D, D], init=init, seed=3)
        assert r.mean == D and r.frechet_value == 0


def test_closed_form_single_point_against_grid_search():
    grid = np.linspace(0, 0.2, 401)
    bb, dd = np.meshgrid(grid, grid, indexing="ij")
    f = 0.5 * (bb**2 + (dd - 0.2) ** 2 + np.where(dd > bb, (dd - bb) ** 2 / 2, 0))
    k = np.unravel_index(f.argmin(), f.shape)
    assert (bb[k], dd[k]) == pytest.approx((0.05, 0.15), abs=1e-3)


def test_compute_mean_argument_errors():
    with pytest.raises(ValueError):
        compute_mean(TWO, max_iter=0)
    with pytest.raises(ValueError):
        compute_mean([])
    with pytest.raises(ValueError):
        compute_mean(TWO, init="nearest")


def test_non_convergence_is_flagged():
    rng = np.random.default_rng(4)
    ds = [random_diagram(rng, 4) for _ in range(4)]
    r = compute_mean(ds, seed=1, max_iter=1)
    if not r.converged:
        assert r.iterations == 1
    full = compute_mean(ds, seed=1)
    assert full.converged


def test_weights_equal_replication():
    rng = np.random.default_rng(9)
    for _ in range(20):
        a, b = random_diagram(rng, 3), random_diagram(rng, 3)
        Y0 = random_diagram(rng, 3)
        r1 = compute_mean([a, b], init=Y0, weights=[3, 1])
        r2 = compute_mean([a, a, a, b], init=Y0)
        assert distance(r1.mean, r2.mean) < 1e-9
        assert r1.frechet_value == pytest.approx(r2.frechet_value, abs=1e-12)


def test_multi_restart_examples():
    D = P([(0, 1), (1, 3)])
    res = multi_restart_mean([D, D, D], restarts=5, seed=0)
    assert len(res.local_minima) == 1 and res.local_minima[0].mean == D
    res = multi_restart_mean(TWO, restarts=5, seed=0)
    assert len(res.local_minima) == 1 and res.best.mean == P([(0, 3)])
    res = multi_restart_mean(SQUARE, restarts=20, seed=0)
    assert len(res.local_minima) == 2 <= local_minima_bound(SQUARE)
    assert res.best.frechet_value == pytest.approx(0.5)


def test_multi_restart_parallel_matches_serial():
    a = multi_restart_mean(SQUARE, restarts=6, seed=11)
    b = multi_restart_mean(SQUARE, restarts=6, seed=11, jobs=2)
    assert [r.mean for r in a.results] == [r.mean for r in b.results]


def test_oracle_examples():
    o = oracle_global_mean(TWO)
    assert o.mean == P([(0, 3)]) and o.frechet_value == pytest.approx(1.0) and o.num_local_minima == 1
    D = P([(0, 1), (2, 4)])
    assert oracle_global_mean([D]).mean == D and oracle_global_mean([D]).frechet_value == 0
    o = oracle_global_mean(SQUARE)
    assert o.num_local_minima == 2 and o.frechet_value == pytest.approx(0.5)


def test_oracle_guard_names_bound():
    big = [P([(0, k + 1) for k in range(6)])] * 6
    with pytest.raises(CapacityError, match="100000"):
        oracle_global_mean(big)


def test_local_minima_bound_value():
    assert local_minima_bound(SQUARE) == 9**4
    assert local_minima_bound([P.empty()]) == 1


def test_certificate_rejects_non_minimum():
    c = local_minimum_certificate(P([(0, 2)]), TWO)
    assert not c.holds and c.supporting_vector_norm == pytest.approx(2.0)
    c = local_minimum_certificate(P.empty(), [P([(0, 2)])])
    assert not c.holds


@given(st.lists(diagrams(3), min_size=1, max_size=3), st.integers(0, 2**16))
def test_descent_properties(ds, seed):
    r = compute_mean(ds, seed=seed)
    assert r.converged
    tr = r.trace
    assert all(b <= a + 1e-12 for a, b in zip(tr, tr[1:]))
    assert r.certificate.supporting_vector_norm <= 1e-9
    assert r.frechet_value == pytest.approx(frechet_function(r.mean, ds), abs=1e-9)


@given(st.lists(diagrams(2), min_size=1, max_size=3), st.integers(0, 2**16))
def test_oracle_lower_bounds_descent(ds, seed):
    o = oracle_global_mean(ds)
    r = compute_mean(ds, seed=seed)
    assert o.frechet_value <= r.frechet_value + 1e-9


@given(st.lists(diagrams(3), min_size=1, max_size=3), st.integers(0, 2**16))
def test_determinism(ds, seed):
    a, b = compute_mean(ds, seed=seed), compute_mean(ds, seed=seed)
    assert a.mean == b.mean and a.trace == b.trace
