import time

import numpy as np
import pytest

from jumplab.qp import QpProblem, QpSolution, kkt_residual, solve

from qp_oracle import enumerate_solve


def random_problem(rng, n, mi, me=0):
    m = rng.normal(size=(n, n))
    w = m @ m.T + 0.5 * np.eye(n)      # strictly convex
    h = rng.normal(size=n)
    g_mat = rng.normal(size=(mi, n))
    z_feas = rng.normal(size=n)
    g_vec = g_mat @ z_feas + rng.uniform(0.1, 1.0, size=mi)  # strictly feasible point
    e_mat = rng.normal(size=(me, n)) if me else None
    e_vec = e_mat @ z_feas if me else None
    return QpProblem(w, h, g_mat, g_vec, e_mat, e_vec)


def test_unconstrained_stationary_point():
    sol = solve(QpProblem(np.array([[1.0]]), np.array([-1.0])))
    assert sol.status == "optimal"
    assert sol.z[0] == pytest.approx(1.0, abs=1e-10)


def test_active_bound_with_multiplier():
    p = QpProblem(np.array([[1.0]]), np.array([-2.0]),
                  g_mat=np.array([[1.0]]), g_vec=np.array([1.0]))
    sol = solve(p)
    assert sol.status == "optimal"
    assert sol.z[0] == pytest.approx(1.0, abs=1e-8)
    assert sol.lam[0] == pytest.approx(1.0, abs=1e-6)
    assert kkt_residual(p, sol.z, sol.lam, sol.mu) < 1e-8


def test_kkt_residual_examples():
    p = QpProblem(np.array([[1.0]]), np.array([-2.0]),
                  g_mat=np.array([[1.0]]), g_vec=np.array([1.0]))
    assert kkt_residual(p, np.array([1.0]), np.array([1.0])) < 1e-10
    p0 = QpProblem(np.array([[1.0]]), np.array([-1.0]))
    assert kkt_residual(p0, np.array([0.0])) == pytest.approx(1.0)
    # feasible but suboptimal
    assert kkt_residual(p, np.array([0.5]), np.array([0.0])) > 0.1


def test_oracle_equivalence_200_random():
    rng = np.random.default_rng(42)
    for i in range(200):
        n = int(rng.integers(1, 7))
        mi = int(rng.integers(0, 9))
        me = int(rng.integers(0, min(n, 3)))
        p = random_problem(rng, n, mi, me)
        sol = solve(p, tol=1e-8)
        assert sol.status == "optimal", f"instance {i}: {sol.status}"
        oracle = enumerate_solve(p.w, p.h, p.g_mat, p.g_vec,
                                 p.e_mat if me else None, p.e_vec if me else None)
        assert oracle is not None
        obj_star, z_star = oracle
        assert np.max(np.abs(sol.z - z_star)) < 1e-6, f"instance {i}"
        assert abs(sol.objective - obj_star) < 1e-6


def test_status_flag_implies_kkt():
    rng = np.random.default_rng(1)
    for _ in range(20):
        p = random_problem(rng, 5, 6, 1)
        sol = solve(p, tol=1e-8)
        assert sol.status == "optimal"
        assert sol.kkt_residual <= 1e-8 * max(1.0, np.abs(p.w).max(), np.abs(p.h).max())


def test_infeasible_inequalities_detected():
    # z <= 0 and z >= 1 cannot both hold
    p = QpProblem(np.array([[1.0]]), np.array([0.0]),
                  g_mat=np.array([[1.0], [-1.0]]), g_vec=np.array([0.0, -1.0]))
    sol = solve(p, max_iter=20000)
    assert sol.status == "infeasible"


def test_infeasible_equalities_detected():
    p = QpProblem(np.eye(2), np.zeros(2),
                  e_mat=np.array([[1.0, 0.0], [1.0, 0.0]]), e_vec=np.array([0.0, 1.0]))
    sol = solve(p)
    assert sol.status == "infeasible"


def test_scaling_invariance_of_argmin():
    rng = np.random.default_rng(9)
    p = random_problem(rng, 4, 5)
    sol1 = solve(p)
    p2 = QpProblem(7.0 * p.w, 7.0 * p.h, p.g_mat, p.g_vec)
    sol2 = solve(p2)
    assert np.max(np.abs(sol1.z - sol2.z)) < 1e-7


def test_psd_only_hessian_regularized():
    # rank-deficient W (zero block), still solvable
    w = np.diag([1.0, 0.0])
    p = QpProblem(w, np.array([-1.0, 0.0]),
                  g_mat=np.array([[0.0, 1.0], [0.0, -1.0]]), g_vec=np.array([1.0, 1.0]))
    sol = solve(p)
    assert sol.status == "optimal"
    assert sol.z[0] == pytest.approx(1.0, abs=1e-6)


def test_solve_time_ilc_scale():
    rng = np.random.default_rng(33)
    n, mi, me = 200, 560, 40
    p = random_problem(rng, n, mi, me)
    t0 = time.perf_counter()
    sol = solve(p, tol=1e-8)
    elapsed = time.perf_counter() - t0
    assert sol.status == "optimal"
    assert elapsed < 1.0, f"solve took {elapsed:.2f} s"


def test_debug_mode_merit_tracking():
    rng = np.random.default_rng(17)
    p = random_problem(rng, 6, 8, 2)
    sol = solve(p, debug=True)
    assert sol.status == "optimal"
