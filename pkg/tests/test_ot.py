import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsot import FeatureSet, cost_matrix, sinkhorn
from fsot.core import DimensionMismatch, NumericalError, UnbalancedMarginals
from fsot.ot import CostMatrix
from oracles import bruteforce_plan


def queries(rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return FeatureSet(rows, np.zeros(len(rows), int), 1)


# ---------------------------------------------------------------------------
# cost matrix
# ---------------------------------------------------------------------------

def test_cost_three_four_five():
    l = cost_matrix(queries([[0.0, 0.0]]), np.array([[3.0, 4.0]]))
    assert l.l[0, 0] == pytest.approx(25.0, abs=1e-12)


def test_cost_zero_at_identical_points():
    l = cost_matrix(queries([[1.5, -2.0, 3.0]]), np.array([[1.5, -2.0, 3.0]]))
    assert l.l[0, 0] == 0.0


def test_cost_double_loop_oracle(rng):
    x = rng.normal(size=(4, 3))
    c = rng.normal(size=(2, 3))
    l = cost_matrix(queries(x), c)
    for i in range(4):
        for j in range(2):
            acc = 0.0
            for k in range(3):
                acc += (x[i, k] - c[j, k]) ** 2
            assert abs(l.l[i, j] - acc) <= 1e-12


def test_cost_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cost_matrix(queries([[0.0, 0.0]]), np.array([[1.0, 2.0, 3.0]]))


def test_cost_matrix_validation():
    with pytest.raises(NumericalError):
        CostMatrix(np.array([[1.0, -0.1]]))
    with pytest.raises(NumericalError):
        CostMatrix(np.array([[1.0, np.inf]]))


# ---------------------------------------------------------------------------
# sinkhorn
# ---------------------------------------------------------------------------

def test_sinkhorn_zero_cost_gives_uniform_plan():
    plan = sinkhorn(CostMatrix(np.zeros((2, 2))), np.ones(2), np.ones(2), lam=3.7)
    np.testing.assert_allclose(plan.m, np.full((2, 2), 0.5), atol=1e-12)


def test_sinkhorn_diagonal_cost_dominance():
    l = CostMatrix(np.array([[0.0, 100.0], [100.0, 0.0]]))
    plan = sinkhorn(l, np.ones(2), np.ones(2), lam=10.0)
    assert plan.m[0, 1] < 1e-6
    assert plan.m[1, 0] < 1e-6
    assert plan.m[0, 0] == pytest.approx(1.0, abs=1e-6)


def test_sinkhorn_matches_bruteforce_oracle_on_frozen_instance():
    l = np.random.default_rng(1234).uniform(0.0, 2.0, (3, 2))
    a = np.ones(3)
    b = np.array([1.5, 1.5])
    plan = sinkhorn(CostMatrix(l), a, b, lam=1.0, max_iter=10000, tol=1e-10)
    frozen = np.array(
        [[0.44605361, 0.55394639], [0.41417602, 0.58582398], [0.63977038, 0.36022962]]
    )
    np.testing.assert_allclose(plan.m, frozen, atol=1e-6)
    oracle = bruteforce_plan(l, a, b, 1.0)
    np.testing.assert_allclose(plan.m, oracle, atol=1e-3)


def test_sinkhorn_rejects_unbalanced_marginals():
    l = CostMatrix(np.zeros((2, 2)))
    with pytest.raises(UnbalancedMarginals):
        sinkhorn(l, np.ones(2), np.array([1.0, 0.5]), lam=1.0)
    with pytest.raises(UnbalancedMarginals):
        sinkhorn(l, np.array([2.0, 0.0]), np.ones(2), lam=1.0)


def test_sinkhorn_nonconvergence_is_flagged_not_fatal(rng):
    l = CostMatrix(rng.uniform(0.0, 5.0, (40, 5)))
    plan = sinkhorn(l, np.ones(40), np.full(5, 8.0), lam=2.0, max_iter=1, tol=1e-14)
    assert not plan.converged
    assert plan.iterations == 1
    # still a usable plan: columns are exact after the sweep
    np.testing.assert_allclose(plan.m.sum(axis=0), 8.0, atol=1e-9)


def test_sinkhorn_log_domain_path_feasible():
    # lam*L beyond exp() range for the first row forces the log path
    l = CostMatrix(np.array([[200.0, 150.0], [0.1, 0.2], [0.3, 0.1]]))
    plan = sinkhorn(l, np.ones(3), np.array([1.5, 1.5]), lam=10.0, tol=1e-9)
    assert plan.converged
    assert plan.m.min() > 0
    np.testing.assert_allclose(plan.m.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(plan.m.sum(axis=0), 1.5, atol=1e-9)


def test_sinkhorn_plain_and_log_paths_agree(rng):
    l = rng.uniform(0.0, 3.0, (12, 4))
    a, b = np.ones(12), np.full(4, 3.0)
    plain = sinkhorn(CostMatrix(l), a, b, lam=5.0, tol=1e-12, max_iter=5000)
    # the same instance shifted by a large constant: only the log path
    # survives, and row-equivariance means the plan is unchanged
    shifted = sinkhorn(CostMatrix(l + 300.0), a, b, lam=5.0, tol=1e-12, max_iter=5000)
    np.testing.assert_allclose(plain.m, shifted.m, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sinkhorn_feasibility_and_positivity(seed):
    rng = np.random.default_rng(seed)
    n, w = int(rng.integers(2, 30)), int(rng.integers(2, 6))
    l = CostMatrix(rng.uniform(0.0, 4.0, (n, w)))
    a = np.ones(n)
    b = rng.dirichlet(np.ones(w)) * n
    plan = sinkhorn(l, a, b, lam=float(rng.uniform(0.1, 15.0)))
    assert plan.m.min() > 0
    assert np.max(np.abs(plan.m.sum(axis=1) - a)) <= 1e-6
    assert np.max(np.abs(plan.m.sum(axis=0) - b)) <= 1e-6


def test_sinkhorn_row_shift_equivariance(rng):
    # adding a constant to one row of the cost rescales that kernel row,
    # which the row scaling vector absorbs: the plan stays put
    l = rng.uniform(0.0, 2.0, (10, 4))
    a, b = np.ones(10), np.full(4, 2.5)
    base = sinkhorn(CostMatrix(l), a, b, lam=3.0, tol=1e-12, max_iter=5000)
    shifted_l = l.copy()
    shifted_l[4] += 7.3
    shifted = sinkhorn(CostMatrix(shifted_l), a, b, lam=3.0, tol=1e-12, max_iter=5000)
    others = np.arange(10) != 4
    assert np.array_equal(
        np.argmax(base.m[others], axis=1), np.argmax(shifted.m[others], axis=1)
    )
    np.testing.assert_allclose(base.m, shifted.m, atol=1e-9)


def test_sinkhorn_violation_trace_is_monotone(rng):
    for _ in range(25):
        n, w = int(rng.integers(3, 60)), int(rng.integers(2, 6))
        l = CostMatrix(rng.uniform(0.0, 5.0, (n, w)))
        b = rng.dirichlet(np.ones(w)) * n
        plan = sinkhorn(l, np.ones(n), b, lam=float(rng.uniform(0.1, 20.0)), tol=1e-10)
        trace = plan.violation_trace
        assert len(trace) == plan.iterations
        assert np.all(trace[1:] <= trace[:-1] + 1e-12)
