import numpy as np
import pytest
from hypothesis import given, strategies as st

from rknn_tsvm.solver import DualProblem, clipdcd_solve, kkt_residual, qp_oracle_solve


def random_problem(m, seed, c=None):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(m, m))
    Q = M @ M.T / m + 0.1 * np.eye(m)
    e = rng.uniform(0.2, 1.5, m)
    if c is None:
        c = rng.uniform(0.05, 3.0)
    return DualProblem(0.5 * (Q + Q.T), e, c)


def test_identity_examples():
    rep = clipdcd_solve(DualProblem(np.eye(2), np.ones(2), 10.0))
    np.testing.assert_allclose(rep.alpha, [1, 1])
    assert DualProblem(np.eye(2), np.ones(2), 10.0).objective(rep.alpha) == pytest.approx(-1.0)
    rep = clipdcd_solve(DualProblem(np.eye(2), np.ones(2), 0.5))
    np.testing.assert_allclose(rep.alpha, [0.5, 0.5])


def test_oracle_examples():
    np.testing.assert_allclose(qp_oracle_solve(DualProblem(np.diag([1.0, 4.0]), np.ones(2), 10.0)),
                               [1.0, 0.25], atol=1e-9)
    assert np.all(qp_oracle_solve(DualProblem(np.eye(3), np.ones(3), 0.0)) == 0)
    np.testing.assert_allclose(qp_oracle_solve(DualProblem(np.eye(2), np.ones(2), 0.5)), [0.5, 0.5])


def test_random_6x6_matches_oracle():
    p = random_problem(6, 3, c=1.0)
    a = clipdcd_solve(p, tol=1e-14).alpha
    b = qp_oracle_solve(p)
    assert abs(p.objective(a) - p.objective(b)) < 1e-6


def test_problem_validation():
    with pytest.raises(ValueError):
        DualProblem(np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones(2), 1.0)
    with pytest.raises(ValueError):
        DualProblem(np.diag([1.0, 0.0]), np.ones(2), 1.0)
    with pytest.raises(ValueError):
        DualProblem(np.diag([1.0, np.nan]), np.ones(2), 1.0)
    with pytest.raises(ValueError):
        DualProblem(np.eye(2), np.ones(3), 1.0)
    with pytest.raises(ValueError):
        clipdcd_solve(DualProblem(np.eye(2), np.ones(2), 1.0), tol=0)
    with pytest.raises(ValueError):
        clipdcd_solve(DualProblem(np.eye(2), np.ones(2), 1.0), max_iter=0)


def test_degenerate_box_and_empty():
    assert np.all(clipdcd_solve(DualProblem(np.eye(3), np.ones(3), 0.0)).alpha == 0)
    rep = clipdcd_solve(DualProblem(np.zeros((0, 0)), np.zeros(0), 1.0))
    assert rep.alpha.size == 0 and rep.converged


def test_first_step_picks_largest_score_lowest_index():
    # scores e_i^2 / Q_ii = 1, 4, 4: index 1 wins the tie with index 2
    p = DualProblem(np.diag([1.0, 1.0, 1.0]), np.array([1.0, 2.0, 2.0]), 10.0)
    rep = clipdcd_solve(p, trace=True)
    assert rep.steps[0][0] == 1


def test_max_iter_respected():
    p = random_problem(20, 0)
    rep = clipdcd_solve(p, tol=1e-300, max_iter=7)
    assert rep.iterations == 7 and not rep.converged


@given(st.integers(1, 50), st.integers(0, 2**31))
def test_matches_oracle_and_kkt(m, seed):
    p = random_problem(m, seed)
    rep = clipdcd_solve(p, tol=1e-14)
    assert np.all((rep.alpha >= 0) & (rep.alpha <= p.upper_bound))
    assert kkt_residual(p, rep.alpha) < 1e-5
    ref = qp_oracle_solve(p, tol=1e-10)
    assert abs(p.objective(rep.alpha) - p.objective(ref)) <= 10 * 1e-5


@given(st.integers(1, 30), st.integers(0, 2**31))
def test_objective_trace_monotone_and_exact_decrease(m, seed):
    p = random_problem(m, seed)
    rep = clipdcd_solve(p, tol=1e-12, trace=True)
    tr = np.array(rep.objective_trace)
    assert np.all(np.diff(tr) <= 1e-12)
    # the tracked objective is the true objective
    assert tr[-1] == pytest.approx(p.objective(rep.alpha), abs=1e-9)
    # unclipped steps decrease f by exactly score / 2
    alpha = np.zeros(m)
    prev = 0.0
    for (L, lam, clipped), f in zip(rep.steps, tr[1:]):
        if not clipped:
            resid = p.linear_term[L] - p.q_matrix[L] @ alpha
            expected = resid ** 2 / (2 * p.q_matrix[L, L])
            assert prev - f == pytest.approx(expected, rel=1e-6, abs=1e-12)
        alpha[L] = min(max(alpha[L] + lam, 0.0), p.upper_bound)
        prev = f


def test_default_tolerance_stops_early_but_near_optimum():
    p = random_problem(30, 11)
    rough = clipdcd_solve(p)
    fine = clipdcd_solve(p, tol=1e-14)
    assert rough.converged and rough.iterations <= fine.iterations
    assert p.objective(rough.alpha) - p.objective(fine.alpha) < 1e-3
