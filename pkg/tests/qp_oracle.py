"""Brute-force QP oracle: enumerate every inequality active set, solve each
equality-constrained subproblem, and return the feasible candidate with the
lowest objective. Only viable for tiny problems; used to certify the solver."""

from itertools import combinations

import numpy as np


def enumerate_solve(w, h, g_mat=None, g_vec=None, e_mat=None, e_vec=None,
                    feas_tol=1e-8):
    w = np.atleast_2d(np.asarray(w, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    n = h.size
    g_mat = np.zeros((0, n)) if g_mat is None else np.atleast_2d(np.asarray(g_mat, float))
    g_vec = np.zeros(0) if g_vec is None else np.asarray(g_vec, float).ravel()
    e_mat = np.zeros((0, n)) if e_mat is None else np.atleast_2d(np.asarray(e_mat, float))
    e_vec = np.zeros(0) if e_vec is None else np.asarray(e_vec, float).ravel()

    mi = g_vec.size
    best = None
    for k in range(mi + 1):
        for subset in combinations(range(mi), k):
            idx = list(subset)
            a = np.vstack([e_mat, g_mat[idx]])
            b = np.concatenate([e_vec, g_vec[idx]])
            na = a.shape[0]
            kkt = np.block([[w, a.T], [a, np.zeros((na, na))]])
            rhs = np.concatenate([-h, b])
            try:
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            except np.linalg.LinAlgError:
                continue
            z = sol[:n]
            if na and np.max(np.abs(a @ z - b)) > feas_tol:
                continue
            if mi and np.max(g_mat @ z - g_vec) > feas_tol:
                continue
            if e_vec.size and np.max(np.abs(e_mat @ z - e_vec)) > feas_tol:
                continue
            obj = float(0.5 * z @ w @ z + h @ z)
            if best is None or obj < best[0]:
                best = (obj, z)
    return best  # None when infeasible
