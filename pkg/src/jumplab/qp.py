"""Dense convex QP solver.

Solves  min 1/2 z'Wz + h'z  s.t.  Gz <= g,  Ez = e  for medium dense problems
(a few hundred variables). The algorithm is operator splitting (over-relaxed
ADMM on the constraint slack) followed by an active-set polish that re-solves
the KKT system on the identified active set, which is what brings the KKT
residual down to tight tolerances. Infeasible constraint systems are detected
from the dual-update certificate and reported as a status, never an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_INF = 1e20


@dataclass
class QpProblem:
    w: np.ndarray
    h: np.ndarray
    g_mat: np.ndarray | None = None
    g_vec: np.ndarray | None = None
    e_mat: np.ndarray | None = None
    e_vec: np.ndarray | None = None

    def __post_init__(self):
        self.w = np.atleast_2d(np.asarray(self.w, dtype=float))
        self.h = np.asarray(self.h, dtype=float).ravel()
        n = self.h.size
        if self.w.shape != (n, n):
            raise ValueError(f"W must be {n}x{n}, got {self.w.shape}")
        if not np.allclose(self.w, self.w.T, atol=1e-10):
            raise ValueError("W must be symmetric within 1e-10")
        if self.g_mat is None:
            self.g_mat = np.zeros((0, n))
            self.g_vec = np.zeros(0)
        else:
            self.g_mat = np.atleast_2d(np.asarray(self.g_mat, dtype=float))
            self.g_vec = np.asarray(self.g_vec, dtype=float).ravel()
        if self.e_mat is None:
            self.e_mat = np.zeros((0, n))
            self.e_vec = np.zeros(0)
        else:
            self.e_mat = np.atleast_2d(np.asarray(self.e_mat, dtype=float))
            self.e_vec = np.asarray(self.e_vec, dtype=float).ravel()
        if self.g_mat.shape != (self.g_vec.size, n):
            raise ValueError("inequality system dimensions inconsistent")
        if self.e_mat.shape != (self.e_vec.size, n):
            raise ValueError("equality system dimensions inconsistent")

    @property
    def n(self) -> int:
        return self.h.size

    def objective(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.w @ z + self.h @ z)


@dataclass
class QpSolution:
    z: np.ndarray
    status: str                      # optimal | infeasible | max-iterations
    objective: float
    kkt_residual: float
    lam: np.ndarray = field(default_factory=lambda: np.zeros(0))
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0


def kkt_residual(p: QpProblem, z: np.ndarray, lam: np.ndarray | None = None,
                 mu: np.ndarray | None = None) -> float:
    """Max of stationarity, primal violation, and complementarity violation."""
    z = np.asarray(z, dtype=float).ravel()
    lam = np.zeros(p.g_vec.size) if lam is None else np.asarray(lam, float).ravel()
    mu = np.zeros(p.e_vec.size) if mu is None else np.asarray(mu, float).ravel()

    stat = p.w @ z + p.h
    if lam.size:
        stat = stat + p.g_mat.T @ lam
    if mu.size:
        stat = stat + p.e_mat.T @ mu
    r = float(np.max(np.abs(stat)))

    if p.g_vec.size:
        slack = p.g_mat @ z - p.g_vec
        r = max(r, float(np.max(slack, initial=0.0)))
        r = max(r, float(np.max(np.abs(lam * slack), initial=0.0)))
        r = max(r, float(np.max(-lam, initial=0.0)))
    if p.e_vec.size:
        r = max(r, float(np.max(np.abs(p.e_mat @ z - p.e_vec))))
    return r


def _regularized_w(w: np.ndarray) -> np.ndarray:
    """Add 1e-9 I (scaled up if needed) until the Hessian factors."""
    reg = 0.0
    for _ in range(8):
        try:
            np.linalg.cholesky(w + reg * np.eye(w.shape[0]) if reg else w)
            return w + reg * np.eye(w.shape[0]) if reg else w
        except np.linalg.LinAlgError:
            reg = 1e-9 * max(1.0, float(np.abs(w).max())) if reg == 0.0 else reg * 100.0
    return w + reg * np.eye(w.shape[0])


def _polish(p: QpProblem, w_reg: np.ndarray, z0: np.ndarray, y_ineq: np.ndarray,
            feas_tol: float, max_rounds: int = 40,
            ) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    """Active-set refinement seeded by the splitting iterate.

    Returns (z, lam, mu) or None when no consistent active set is found.
    """
    mi, me, n = p.g_vec.size, p.e_vec.size, p.n
    if mi:
        slack = p.g_mat @ z0 - p.g_vec
        active = (slack > -feas_tol * (1.0 + np.abs(p.g_vec))) | (y_ineq > feas_tol)
    else:
        active = np.zeros(0, dtype=bool)

    for _ in range(max_rounds):
        idx = np.flatnonzero(active)
        a_act = np.vstack([p.e_mat, p.g_mat[idx]]) if (me or idx.size) else np.zeros((0, n))
        b_act = np.concatenate([p.e_vec, p.g_vec[idx]])
        na = a_act.shape[0]
        kkt = np.block([[w_reg, a_act.T], [a_act, np.zeros((na, na))]])
        rhs = np.concatenate([-p.h, b_act])
        sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
        # one step of iterative refinement keeps the KKT residual near machine eps
        sol = sol + np.linalg.lstsq(kkt, rhs - kkt @ sol, rcond=None)[0]
        z = sol[:n]
        mu = sol[n:n + me]
        nu = sol[n + me:]

        changed = False
        if idx.size:
            worst = np.argmin(nu)
            if nu[worst] < -feas_tol:
                active[idx[worst]] = False
                changed = True
        if not changed and mi:
            slack = p.g_mat @ z - p.g_vec
            slack[active] = -np.inf
            worst = np.argmax(slack) if slack.size else 0
            if slack.size and slack[worst] > feas_tol * (1.0 + abs(p.g_vec[worst])):
                active[worst] = True
                changed = True
        if not changed:
            lam = np.zeros(mi)
            lam[idx] = np.maximum(nu, 0.0)
            return z, lam, mu
    return None


def solve(p: QpProblem, tol: float = 1e-8, max_iter: int = 20000,
          debug: bool = False) -> QpSolution:
    """Solve the QP. Status is optimal, infeasible, or max-iterations."""
    n = p.n
    w_reg = _regularized_w(p.w)
    mi, me = p.g_vec.size, p.e_vec.size
    m = mi + me

    if m == 0:
        z = np.linalg.solve(w_reg, -p.h)
        res = kkt_residual(p, z)
        return QpSolution(z=z, status="optimal", objective=p.objective(z),
                          kkt_residual=res)

    # quick certificate for inconsistent equalities
    if me:
        ls, *_ = np.linalg.lstsq(p.e_mat, p.e_vec, rcond=None)
        if np.max(np.abs(p.e_mat @ ls - p.e_vec)) > 1e-7 * (1.0 + np.max(np.abs(p.e_vec))):
            return QpSolution(z=np.zeros(n), status="infeasible",
                              objective=np.inf, kkt_residual=np.inf)

    a = np.vstack([p.g_mat, p.e_mat])
    lo = np.concatenate([np.full(mi, -_INF), p.e_vec])
    hi = np.concatenate([p.g_vec, p.e_vec])

    sigma = 1e-6
    alpha = 1.6
    scale = max(1.0, float(np.abs(p.w).max()), float(np.abs(p.h).max()))
    rho = np.full(m, 0.1 * scale)
    rho[mi:] *= 1e3

    def factor(rho_vec):
        mat = w_reg + sigma * np.eye(n) + a.T @ (rho_vec[:, None] * a)
        return np.linalg.cholesky(mat)

    def chol_solve(lower, b):
        return np.linalg.solve(lower.T, np.linalg.solve(lower, b))

    lower = factor(rho)
    x = np.zeros(n)
    zs = np.clip(a @ x, lo, hi)
    y = np.zeros(m)

    feas_tol = max(tol, 1e-9)
    admm_tol = max(tol, 1e-6)
    best = None
    merits: list[float] = []
    status = "max-iterations"
    it = 0

    while it < max_iter:
        it += 1
        rhs = sigma * x - p.h + a.T @ (rho * zs - y)
        x_hat = chol_solve(lower, rhs)
        ax_hat = a @ x_hat
        x = alpha * x_hat + (1.0 - alpha) * x
        z_old = zs
        zs = np.clip(alpha * ax_hat + (1.0 - alpha) * z_old + y / rho, lo, hi)
        dy = rho * (alpha * ax_hat + (1.0 - alpha) * z_old - zs)
        y = y + dy

        if it % 25 == 0 or it == max_iter:
            ax = a @ x
            r_prim = float(np.max(np.abs(ax - zs), initial=0.0))
            r_dual = float(np.max(np.abs(p.w @ x + p.h + a.T @ y), initial=0.0))
            prim_ref = max(1.0, float(np.max(np.abs(ax), initial=0.0)),
                           float(np.max(np.abs(zs), initial=0.0)))
            dual_ref = max(1.0, float(np.max(np.abs(p.w @ x), initial=0.0)),
                           float(np.max(np.abs(a.T @ y), initial=0.0)),
                           float(np.max(np.abs(p.h), initial=0.0)))

            if debug:
                viol = float(np.max(np.maximum(a @ x - hi, 0.0), initial=0.0)
                             + np.max(np.maximum(lo - a @ x, 0.0), initial=0.0))
                merits.append(p.objective(x) + 1e4 * scale * viol)

            if r_prim <= admm_tol * prim_ref and r_dual <= admm_tol * dual_ref:
                polished = _polish(p, w_reg, x, np.maximum(y[:mi], 0.0), feas_tol)
                if polished is not None:
                    z_p, lam, mu = polished
                    res = kkt_residual(p, z_p, lam, mu)
                    if res <= max(tol, 1e-8 * scale):
                        return QpSolution(z=z_p, status="optimal",
                                          objective=p.objective(z_p),
                                          kkt_residual=res, lam=lam, mu=mu,
                                          iterations=it)
                    if best is None or res < best[1]:
                        best = ((z_p, lam, mu), res)
                # fall back to the raw iterate if the polish cannot certify
                lam_raw = np.maximum(y[:mi], 0.0)
                res_raw = kkt_residual(p, x, lam_raw, y[mi:])
                if best is None or res_raw < best[1]:
                    best = ((x, lam_raw, y[mi:]), res_raw)
                if res_raw <= max(tol, 1e-8 * scale):
                    return QpSolution(z=x, status="optimal", objective=p.objective(x),
                                      kkt_residual=res_raw, lam=lam_raw, mu=y[mi:],
                                      iterations=it)
                admm_tol = max(admm_tol * 0.1, tol * 1e-2, 1e-12)

            # primal infeasibility certificate from the dual direction; only
            # meaningful while the primal residual is far from converging
            dy_norm = float(np.max(np.abs(dy), initial=0.0))
            if (r_prim > max(100.0 * admm_tol * prim_ref, 1e-6)
                    and dy_norm > 1e-10 * (1.0 + float(np.max(np.abs(y))))):
                dyh = dy / dy_norm
                a_scale = max(1.0, float(np.abs(a).max()))
                b_scale = max(1.0, float(np.max(np.abs(hi[np.abs(hi) < _INF]),
                                                initial=0.0)))
                at_dy = float(np.max(np.abs(a.T @ dyh)))
                support = float(hi @ np.maximum(dyh, 0.0)
                                + np.where(lo <= -_INF, 0.0, lo) @ np.minimum(dyh, 0.0))
                unbounded_side = bool(np.any((lo <= -_INF) & (dyh < -1e-6)))
                if (at_dy <= 1e-4 * a_scale and not unbounded_side
                        and support < -1e-4 * b_scale):
                    status = "infeasible"
                    break

            # mild rho adaptation when residuals are badly unbalanced
            if it % 200 == 0 and r_prim > 0 and r_dual > 0:
                ratio = (r_prim / prim_ref) / max(r_dual / dual_ref, 1e-16)
                if ratio > 100.0 or ratio < 0.01:
                    rho = np.clip(rho * np.sqrt(ratio), 1e-8 * scale, 1e8 * scale)
                    lower = factor(rho)

    if debug and len(merits) >= 4:
        half = len(merits) // 2
        early, late = min(merits[:half]), min(merits[half:])
        assert late <= early + 1e-6 * (1.0 + abs(early)), \
            f"splitting merit regressed: {early} -> {late}"

    if status == "infeasible":
        return QpSolution(z=x, status="infeasible", objective=np.inf,
                          kkt_residual=np.inf, iterations=it)

    if best is not None:
        (z_b, lam_b, mu_b), res_b = best
        return QpSolution(z=z_b, status="max-iterations", objective=p.objective(z_b),
                          kkt_residual=res_b, lam=lam_b, mu=mu_b, iterations=it)
    lam_raw = np.maximum(y[:mi], 0.0)
    return QpSolution(z=x, status="max-iterations", objective=p.objective(x),
                      kkt_residual=kkt_residual(p, x, lam_raw, y[mi:]),
                      lam=lam_raw, mu=y[mi:], iterations=it)
