"""Reference generation: nominal body trajectory, joint references, and the
first-trial feedforward forces.

The pipeline is analytic: projectile flight fixes the takeoff velocity, a
quintic profile (with an affine acceleration correction that makes the sampled
trajectory an exact orbit of the explicit-Euler discrete model) shapes the
contact phase, and a per-sample force-distribution QP turns the required
trunk wrench into feasible foot forces.

Pitch needs care: with a single rear foot in contact, the foot force dictates
the pitch moment, and the trunk pitch inertia is small enough that any
inconsistency integrates into huge pitch rates. So the pitch reference is
designed first (flat by default, a smooth ramp when the task wants a landing
pitch), the rear-contact horizontal force is derived from the torque balance
(the force line passes through the CoM apart from the designed pitch torque),
and the rear-foot placement is found by a one-dimensional shooting so the
resulting takeoff velocity lands the flight exactly on the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .legs import KinematicsError, leg_ik, leg_jacobian, rot2
from .params import ForceBounds, PhaseSchedule, RobotParams
from .qp import QpProblem, solve
from .srb import BodyState, FootGeometry, discretize, rollout
from .tasks import JumpTask

Z_STAND = 0.20
Z_CROUCH = 0.13
Z_TAKEOFF = 0.33
CROUCH_FRACTION = 0.6           # share of the all-leg phase spent crouching
FRONT_SPACING = 0.26            # front foot ahead of the rear foot
MARGIN_BRACKET = (0.004, 0.15)  # CoM lead over the rear foot (shooting variable)
TUCK_FRACTION = 0.5
SWING_BLEND_SAMPLES = 15


class ReferenceError(ValueError):
    """Reference generation failed; message carries the sample index."""


@dataclass
class ReferenceBundle:
    """Nominal trajectory, joint references, and first-trial feedforward."""

    body_ref: np.ndarray        # (N+1, 6)
    joint_q: np.ndarray         # (N+1, 4)
    joint_qd: np.ndarray        # (N+1, 4)
    u_init: np.ndarray          # (N_c, 4)
    feet_ref: np.ndarray        # (N_c, 2, 2) world foot positions per contact sample
    stance_feet: np.ndarray     # (2,) stance x of (front, rear) feet
    wrench_ref: np.ndarray      # (N_c, 3) required (F_x, F_z, torque) per sample
    task: JumpTask
    distribution_residuals: tuple = ()


def ballistic_takeoff(delta: tuple[float, float], flight_time: float,
                      gravity: float = 9.81) -> tuple[float, float]:
    """Takeoff velocity reaching (dx, dz) after flight_time of projectile flight."""
    if flight_time <= 0.0:
        raise ValueError("flight_time must be > 0")
    dx, dz = delta
    return dx / flight_time, dz / flight_time + gravity * flight_time / 2.0


def _discrete_takeoff_vz(dz: float, n_fl: int, dt: float, gravity: float) -> float:
    # Euler-grid version of the projectile formula: lands exactly on the grid
    t_fl = n_fl * dt
    return dz / t_fl + gravity * (t_fl - dt) / 2.0


def _quintic_accels(p0, v0, a0, p1, v1, a1, horizon: float, times: np.ndarray):
    mat = np.array([
        [1, 0, 0, 0, 0, 0],
        [0, 1, 0, 0, 0, 0],
        [0, 0, 2, 0, 0, 0],
        [1, horizon, horizon**2, horizon**3, horizon**4, horizon**5],
        [0, 1, 2 * horizon, 3 * horizon**2, 4 * horizon**3, 5 * horizon**4],
        [0, 0, 2, 6 * horizon, 12 * horizon**2, 20 * horizon**3],
    ])
    c = np.linalg.solve(mat, np.array([p0, v0, a0, p1, v1, a1], dtype=float))
    t = np.asarray(times)
    return 2 * c[2] + 6 * c[3] * t + 12 * c[4] * t**2 + 20 * c[5] * t**3


def _correct_accels(a_base: np.ndarray, p0: float, v0: float, p1: float, v1: float,
                    dt: float) -> np.ndarray:
    """Affine correction a_t + alpha + beta*t so the explicit-Euler rollout of the
    accelerations hits (p1, v1) exactly after len(a_base) steps."""
    m = a_base.size
    t_idx = np.arange(m, dtype=float)
    w_pos = (m - 1.0) - t_idx        # weight of a_t in the terminal position sum
    sv = float(a_base.sum())
    sp = float((w_pos * a_base).sum())
    # v1 = v0 + dt*(sv + m*alpha + beta*sum(t)); p1 = p0 + dt*m*v0 + dt^2*(sp + ...)
    mat = np.array([[m, t_idx.sum()], [w_pos.sum(), (w_pos * t_idx).sum()]])
    rhs = np.array([(v1 - v0) / dt - sv,
                    (p1 - p0 - dt * m * v0) / dt**2 - sp])
    alpha, beta = np.linalg.solve(mat, rhs)
    return a_base + alpha + beta * t_idx


def _euler_rollout_1d(p0: float, v0: float, accels: np.ndarray, dt: float):
    m = accels.size
    p = np.zeros(m + 1)
    v = np.zeros(m + 1)
    p[0], v[0] = p0, v0
    for t in range(m):
        p[t + 1] = p[t] + dt * v[t]
        v[t + 1] = v[t] + dt * accels[t]
    return p, v


def contact_profile(start: BodyState, takeoff: BodyState,
                    schedule: PhaseSchedule) -> np.ndarray:
    """Body reference over the contact samples [0, N_c], one row per sample.

    Quintic per coordinate between the two boundary states (zero boundary
    accelerations), with the acceleration correction that makes the sampled
    profile an exact explicit-Euler trajectory ending on the takeoff state.
    """
    n_c = schedule.n_contact
    dt = schedule.dt
    horizon = n_c * dt
    times = np.arange(n_c) * dt
    s = start.as_vector()
    e = takeoff.as_vector()
    out = np.zeros((n_c + 1, 6))
    for i in range(3):
        base = _quintic_accels(s[i], s[3 + i], 0.0, e[i], e[3 + i], 0.0,
                               horizon, times)
        acc = _correct_accels(base, s[i], s[3 + i], e[i], e[3 + i], dt)
        p, v = _euler_rollout_1d(s[i], s[3 + i], acc, dt)
        out[:, i] = p
        out[:, 3 + i] = v
    return out


def feedforward_forces(body_ref: np.ndarray, feet: list[FootGeometry],
                       schedule: PhaseSchedule, bounds: ForceBounds,
                       mu: float, params: RobotParams,
                       ) -> tuple[np.ndarray, tuple]:
    """Distribute the per-sample reference trunk wrench over the stance feet.

    body_ref rows [0, N_c]; feet gives one FootGeometry per contact sample.
    Each sample solves a small QP: exact wrench reproduction with minimum
    force magnitude when feasible, otherwise minimum weighted wrench residual;
    both under the friction cone, normal-force bounds, and phase zeroing.
    Returns (u, residual report) where the report lists (sample, residual).
    """
    n_c = schedule.n_contact
    if len(feet) != n_c:
        raise ReferenceError(f"need {n_c} foot geometries, got {len(feet)}")
    body_ref = np.asarray(body_ref, dtype=float)
    dt = schedule.dt
    m, inertia, g = params.trunk_mass, params.trunk_inertia, params.gravity

    u = np.zeros((n_c, 4))
    residuals = []
    for t in range(n_c):
        acc = (body_ref[t + 1, 3:] - body_ref[t, 3:]) / dt
        wrench = np.array([m * acc[0], m * (acc[1] + g), inertia * acc[2]])
        r = feet[t].as_array()
        # wrench rows: sum fx, sum fz, sum (r x f)
        a_eq = np.array([[1, 0, 1, 0],
                         [0, 1, 0, 1],
                         [-r[0, 1], r[0, 0], -r[1, 1], r[1, 0]]], dtype=float)

        front_stance = schedule.front_in_contact(t)
        g_rows, g_vals = [], []
        phase_rows, phase_vals = [], []
        for leg in range(2):
            ix, iz = 2 * leg, 2 * leg + 1
            if leg == 0 and not front_stance:
                for k in (ix, iz):
                    row = np.zeros(4)
                    row[k] = 1.0
                    phase_rows.append(row)
                    phase_vals.append(0.0)
                continue
            for sgn in (1.0, -1.0):
                row = np.zeros(4)
                row[ix] = sgn
                row[iz] = -mu
                g_rows.append(row)
                g_vals.append(0.0)
            row = np.zeros(4)
            row[iz] = 1.0
            g_rows.append(row)
            g_vals.append(bounds.f_max)
            row = np.zeros(4)
            row[iz] = -1.0
            g_rows.append(row)
            g_vals.append(-bounds.f_min)

        g_mat = np.array(g_rows)
        g_vec = np.array(g_vals)
        e_mat = np.vstack([a_eq] + ([np.array(phase_rows)] if phase_rows else []))
        e_vec = np.concatenate([wrench] + ([np.array(phase_vals)] if phase_vals else []))

        sol = solve(QpProblem(np.eye(4), np.zeros(4), g_mat, g_vec, e_mat, e_vec),
                    tol=1e-9)
        if sol.status == "optimal":
            u[t] = sol.z
            continue

        # exact reproduction infeasible: minimize the weighted wrench residual
        lam = np.diag([1.0, 1.0, 25.0])
        w2 = a_eq.T @ lam @ a_eq + 1e-9 * np.eye(4)
        h2 = -a_eq.T @ lam @ wrench
        e2_mat = np.array(phase_rows) if phase_rows else None
        e2_vec = np.array(phase_vals) if phase_rows else None
        sol2 = solve(QpProblem(w2, h2, g_mat, g_vec, e2_mat, e2_vec), tol=1e-9)
        if sol2.status != "optimal":
            raise ReferenceError(
                f"force distribution infeasible at sample {t} "
                f"(status {sol2.status}); consider relaxing f_max")
        u[t] = sol2.z
        residuals.append((t, float(np.linalg.norm(a_eq @ sol2.z - wrench))))
    return u, tuple(residuals)


def joint_refs(body_ref: np.ndarray, stance_feet: np.ndarray,
               schedule: PhaseSchedule, params: RobotParams,
               ) -> tuple[np.ndarray, np.ndarray]:
    """Joint angle/velocity references tracking the stance feet, then tucking.

    Stance feet are pinned world points; after each leg's scheduled lift-off
    its hip-frame target blends to the flight tuck (a fraction of leg reach
    straight under the hip). Velocities come from the analytic Jacobian
    inverse away from singularities, finite differences near them.
    """
    n = schedule.n_total
    dt = schedule.dt
    tuck = np.array([0.0, -TUCK_FRACTION * params.max_reach])
    liftoff = {0: schedule.n_dc, 1: schedule.n_contact}
    hip_sign = {0: 1.0, 1: -1.0}

    targets = np.zeros((n + 1, 2, 2))   # hip-frame foot targets
    for leg in range(2):
        foot_w = np.array([stance_feet[leg], 0.0])
        hip_off = np.array([hip_sign[leg] * params.hip_x, 0.0])
        frozen = None
        for t in range(n + 1):
            com = body_ref[t, :2]
            theta = body_ref[t, 2]
            stance_target = rot2(theta).T @ (foot_w - com) - hip_off
            if t <= liftoff[leg]:
                targets[t, leg] = stance_target
                frozen = stance_target
            else:
                s = min(1.0, (t - liftoff[leg]) / SWING_BLEND_SAMPLES)
                blend = 0.5 * (1.0 - np.cos(np.pi * s))
                targets[t, leg] = (1.0 - blend) * frozen + blend * tuck

    q = np.zeros((n + 1, 4))
    for t in range(n + 1):
        for leg in range(2):
            try:
                q[t, 2 * leg:2 * leg + 2] = leg_ik(targets[t, leg], params)
            except KinematicsError as exc:
                raise ReferenceError(f"sample {t}, leg {leg}: {exc}") from exc

    qd = np.zeros((n + 1, 4))
    for t in range(n + 1):
        lo, hi = max(0, t - 1), min(n, t + 1)
        span = (hi - lo) * dt
        for leg in range(2):
            sl = slice(2 * leg, 2 * leg + 2)
            jac = leg_jacobian(q[t, sl], params)
            if abs(np.linalg.det(jac)) > 1e-4:
                v = (targets[hi, leg] - targets[lo, leg]) / span
                qd[t, sl] = np.linalg.solve(jac, v)
            else:
                qd[t, sl] = (q[hi, sl] - q[lo, sl]) / span
    return q, qd


def build_references(task: JumpTask, params: RobotParams | None = None,
                     z_stand: float = Z_STAND) -> ReferenceBundle:
    """Full reference bundle for a task: body, joints, feedforward forces."""
    params = params or RobotParams()
    sched = task.schedule
    n_dc, n_sc, n_fl = sched.n_dc, sched.n_sc, sched.n_fl
    n_c, n = sched.n_contact, sched.n_total
    dt = sched.dt
    g = params.gravity
    m, inertia = params.trunk_mass, params.trunk_inertia
    x_tgt, z_tgt, th_tgt = task.target
    t_fl = n_fl * dt

    # vertical profile: crouched stand to an extended, fast takeoff
    z_to = z_stand + TAKEOFF_RISE
    v_z_to = _discrete_takeoff_vz(z_tgt - z_to, n_fl, dt, g)
    times = np.arange(n_c) * dt
    horizon = n_c * dt
    a_z = _correct_accels(
        _quintic_accels(z_stand, 0.0, 0.0, z_to, v_z_to, 0.0, horizon, times),
        z_stand, 0.0, z_to, v_z_to, dt)
    p_z, v_z = _euler_rollout_1d(z_stand, 0.0, a_z, dt)
    lift = a_z + g
    if np.any(lift[:-1] <= 0.2 * g):
        raise ReferenceError("vertical profile demands near-zero ground force; "
                             "takeoff velocity too aggressive for the crouch")

    # the CoM holds still horizontally while both feet push; the pitch ramps
    # smoothly to the target pitch during rear contact and stays there
    sc_times = np.arange(n_sc) * dt
    alpha_th = np.zeros(n_c)
    if th_tgt != 0.0:
        alpha_th[n_dc:] = _correct_accels(
            _quintic_accels(0.0, 0.0, 0.0, th_tgt, 0.0, 0.0, n_sc * dt, sc_times),
            0.0, 0.0, th_tgt, 0.0, dt)
    tau_des = inertia * alpha_th
    p_th, v_th = _euler_rollout_1d(0.0, 0.0, alpha_th, dt)

    def build_x(margin: float):
        """Horizontal profile: at rest over the all-leg phase, then the
        torque-balance law F_x = (r_x F_z - tau)/r_z under the rear foot.
        The rear foot sits `margin` behind the CoM; a larger margin tilts the
        force line further forward and drives a longer jump."""
        a_x = np.zeros(n_c)
        p = np.zeros(n_c + 1)
        v = np.zeros(n_c + 1)
        x_rear = -margin
        for t in range(n_c):
            if t >= n_dc:
                f_x = ((x_rear - p[t]) * m * lift[t] - tau_des[t]) / (-p_z[t])
                a_x[t] = f_x / m
            p[t + 1] = p[t] + dt * v[t]
            v[t + 1] = v[t] + dt * a_x[t]
        return p, v, a_x

    def miss(margin: float) -> float:
        p, v, _ = build_x(margin)
        return p[n_c] + t_fl * v[n_c] - x_tgt

    lo, hi = MARGIN_BRACKET
    f_lo, f_hi = miss(lo), miss(hi)
    if f_lo * f_hi > 0.0:
        raise ReferenceError(
            f"target x = {x_tgt:.3f} m outside the reachable range "
            f"[{x_tgt - f_lo:.2f}, {x_tgt - f_hi:.2f}] m of this stance")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = miss(mid)
        if f_lo * f_mid <= 0.0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
        if abs(f_mid) < 1e-13 or hi - lo < 1e-15:
            break
    margin = 0.5 * (lo + hi)
    p_x, v_x, a_x = build_x(margin)
    x_rear = -margin
    x_front = x_rear + FRONT_SPACING
    stance_feet = np.array([x_front, x_rear])

    body_ref = np.zeros((n + 1, 6))
    body_ref[:n_c + 1, 0] = p_x
    body_ref[:n_c + 1, 1] = p_z
    body_ref[:n_c + 1, 2] = p_th
    body_ref[:n_c + 1, 3] = v_x
    body_ref[:n_c + 1, 4] = v_z
    body_ref[:n_c + 1, 5] = v_th

    # flight: exact Euler ballistics from the takeoff sample
    for t in range(n_c, n):
        body_ref[t + 1, :3] = body_ref[t, :3] + dt * body_ref[t, 3:]
        body_ref[t + 1, 3:] = body_ref[t, 3:]
        body_ref[t + 1, 4] -= dt * g

    feet = [FootGeometry(r_front=(x_front - p_x[t], 0.0 - p_z[t]),
                         r_rear=(x_rear - p_x[t], 0.0 - p_z[t]))
            for t in range(n_c)]
    u_init, residuals = feedforward_forces(body_ref[:n_c + 1], feet, sched,
                                           task.force_bounds, task.ground.mu,
                                           params)

    wrench = np.zeros((n_c, 3))
    wrench[:, 0] = m * a_x
    wrench[:, 1] = m * lift
    wrench[:, 2] = tau_des

    jq, jqd = joint_refs(body_ref, stance_feet, sched, params)

    feet_world = np.zeros((n_c, 2, 2))
    feet_world[:, 0, 0] = x_front
    feet_world[:, 1, 0] = x_rear

    return ReferenceBundle(body_ref=body_ref, joint_q=jq, joint_qd=jqd,
                           u_init=u_init, feet_ref=feet_world,
                           stance_feet=stance_feet, wrench_ref=wrench,
                           task=task, distribution_residuals=residuals)


def replay_through_model(bundle: ReferenceBundle,
                         params: RobotParams | None = None) -> np.ndarray:
    """Roll u_init through the discrete trunk model; returns states (N+1, 6)."""
    params = params or RobotParams()
    sched = bundle.task.schedule
    feet = [FootGeometry(r_front=(bundle.feet_ref[t, 0, 0] - bundle.body_ref[t, 0],
                                  bundle.feet_ref[t, 0, 1] - bundle.body_ref[t, 1]),
                         r_rear=(bundle.feet_ref[t, 1, 0] - bundle.body_ref[t, 0],
                                 bundle.feet_ref[t, 1, 1] - bundle.body_ref[t, 1]))
            for t in range(sched.n_contact)]
    model = discretize(feet, sched, params)
    return rollout(model, bundle.body_ref[0], bundle.u_init, sched.n_total)


def transfer_terminal_state(bundle: ReferenceBundle, new_task: JumpTask,
                            params: RobotParams | None = None) -> np.ndarray:
    """Terminal reference state for a new target reached from the learned takeoff."""
    params = params or RobotParams()
    sched = bundle.task.schedule
    take = bundle.body_ref[sched.n_contact]
    t_fl = sched.n_fl * sched.dt
    x_tgt, z_tgt, th_tgt = new_task.target
    v_x = (x_tgt - take[0]) / t_fl
    v_z_to = _discrete_takeoff_vz(z_tgt - take[1], sched.n_fl, sched.dt,
                                  params.gravity)
    v_z_land = v_z_to - sched.n_fl * sched.dt * params.gravity
    omega = (th_tgt - take[2]) / t_fl
    return np.array([x_tgt, z_tgt, th_tgt, v_x, v_z_land, omega])


def transfer_reference(bundle: ReferenceBundle, new_task: JumpTask,
                       params: RobotParams | None = None) -> ReferenceBundle:
    """Reference bundle for a transfer run: the simple task's references with
    only the terminal body state replaced by the new goal."""
    body_ref = bundle.body_ref.copy()
    body_ref[-1] = transfer_terminal_state(bundle, new_task, params)
    return ReferenceBundle(body_ref=body_ref, joint_q=bundle.joint_q.copy(),
                           joint_qd=bundle.joint_qd.copy(),
                           u_init=bundle.u_init.copy(),
                           feet_ref=bundle.feet_ref.copy(),
                           stance_feet=bundle.stance_feet.copy(),
                           wrench_ref=bundle.wrench_ref.copy(),
                           task=new_task,
                           distribution_residuals=bundle.distribution_residuals)
