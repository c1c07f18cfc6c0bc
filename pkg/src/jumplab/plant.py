"""Articulated planar plant: the stand-in for the real robot.

A 7-DoF model (trunk x, z, pitch + two 2-link legs) with link masses, ground
contact from the spring-damper model, per-motor torque/voltage clamping, and
the 1 kHz joint PD + force feedforward controller. Trials start from the
settled stance equilibrium and end exactly at the last scheduled sample;
landing recovery is out of scope.

The trunk reference point is the geometric trunk center (what the references
and logs track); an attached payload shifts the composite CoM and inertia away
from it, which the learner never sees.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .actuator import actuator_clamp
from .ground import ground_reaction
from .legs import force_to_torque, rot2
from .params import (TRUNK_HEIGHT, ActuatorParams, LowLevelGains, Payload,
                     PhaseSchedule, RobotParams)
from .tasks import JumpTask

JOINT_NAMES = ("front_thigh", "front_calf", "rear_thigh", "rear_calf")
BAD_LANDING_ANGLE = np.deg2rad(70.0)

FAIL_DIVERGENCE = "divergence"
FAIL_COLLISION = "collision"
FAIL_BAD_LANDING = "bad-landing-angle"


@dataclass
class TrialRecord:
    """Everything logged from one jump execution at the learner sample rate."""

    body: np.ndarray           # (N+1, 6) trunk state per sample
    body_ref: np.ndarray       # (N+1, 6)
    joints_q: np.ndarray       # (N+1, 4)
    joints_qd: np.ndarray      # (N+1, 4)
    joint_ref_q: np.ndarray    # (N+1, 4)
    joint_ref_qd: np.ndarray   # (N+1, 4)
    applied_u: np.ndarray      # (N_c, 4) realized foot forces (mean per sample)
    commanded_u: np.ndarray    # (N_c, 4)
    torques: np.ndarray        # (N+1, 4) per-motor N*m
    voltages: np.ndarray       # (N+1, 4) per-motor V
    errors: np.ndarray         # (N+1, 6) body_ref - body
    foot_pos: np.ndarray       # (N+1, 2, 2) world foot positions (front, rear)
    failures: tuple[str, ...] = ()
    failure_tick: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return FAIL_DIVERGENCE in self.failures

    def final_error(self) -> tuple[float, float, float]:
        e = self.errors[-1]
        return float(e[0]), float(e[1]), float(e[2])


class PlantModel:
    """Mass matrix, bias, gravity, and foot kinematics of the 7-DoF plant."""

    def __init__(self, params: RobotParams, payload: Payload | None = None):
        self.params = params
        payload = payload or Payload()
        m0, i0 = params.trunk_mass, params.trunk_inertia
        off = np.asarray(payload.offset, dtype=float)
        m_c = m0 + payload.mass
        delta = payload.mass * off / m_c
        i_c = i0 + m0 * float(delta @ delta) \
            + payload.mass * float((off - delta) @ (off - delta))
        self.trunk_mass = m_c
        self.trunk_com_offset = delta        # body frame, from the reference point
        self.trunk_inertia = i_c
        self.m_thigh = params.thigh_mass
        self.m_calf = params.calf_mass
        self.i_thigh = params.thigh_mass * params.thigh_length**2 / 12.0
        self.i_calf = params.calf_mass * params.calf_length**2 / 12.0
        self.hip_signs = (1.0, -1.0)         # front, rear
        self.total_mass = m_c + 2 * (self.m_thigh + self.m_calf)

    def terms(self, q: np.ndarray, qd: np.ndarray):
        """Returns (H, bias, gravity, foot_pos, foot_vel, foot_jac, potential)."""
        p = self.params
        l1, l2 = p.thigh_length, p.calf_length
        g = p.gravity
        x, z, th = q[0], q[1], q[2]
        thd = qd[2]
        cth, sth = np.cos(th), np.sin(th)
        u_th = np.array([cth, sth])
        u_thp = np.array([-sth, cth])

        h = np.zeros((7, 7))
        bias = np.zeros(7)
        grav = np.zeros(7)

        # trunk composite: point mass at the (possibly shifted) CoM + inertia
        d_w = np.array([[cth, -sth], [sth, cth]]) @ self.trunk_com_offset
        j_tr = np.zeros((2, 7))
        j_tr[0, 0] = j_tr[1, 1] = 1.0
        j_tr[0, 2] = -d_w[1]
        j_tr[1, 2] = d_w[0]
        m = self.trunk_mass
        h += m * j_tr.T @ j_tr
        h[2, 2] += self.trunk_inertia
        bias += m * (j_tr.T @ (-thd * thd * d_w))
        grav += m * g * j_tr[1]
        pe = m * g * (z + d_w[1])

        foot_pos = np.zeros((2, 2))
        foot_vel = np.zeros((2, 2))
        foot_jac = np.zeros((2, 2, 7))

        for leg, sign in enumerate(self.hip_signs):
            jt, jc = 3 + 2 * leg, 4 + 2 * leg
            d = sign * p.hip_x
            a = th + q[jt]
            b = a + q[jc]
            ad = thd + qd[jt]
            bd = ad + qd[jc]
            u_a = np.array([np.cos(a), np.sin(a)])
            u_ap = np.array([-u_a[1], u_a[0]])
            u_b = np.array([np.cos(b), np.sin(b)])
            u_bp = np.array([-u_b[1], u_b[0]])
            hip_w = d * u_th

            for mass, alpha, beta, want_foot in (
                    (self.m_thigh, l1 / 2.0, 0.0, False),
                    (self.m_calf, l1, l2 / 2.0, False),
                    (0.0, l1, l2, True)):
                jac = np.zeros((2, 7))
                jac[0, 0] = jac[1, 1] = 1.0
                swing = alpha * u_ap + beta * u_bp
                jac[:, 2] = d * u_thp + swing
                jac[:, jt] = swing
                jac[:, jc] = beta * u_bp
                pos = np.array([x, z]) + hip_w + alpha * u_a + beta * u_b
                if want_foot:
                    foot_pos[leg] = pos
                    foot_vel[leg] = jac @ qd
                    foot_jac[leg] = jac
                    continue
                conv = -thd * thd * hip_w - ad * ad * alpha * u_a \
                    - bd * bd * beta * u_b
                h += mass * jac.T @ jac
                bias += mass * (jac.T @ conv)
                grav += mass * g * jac[1]
                pe += mass * g * pos[1]

            h[2, 2] += self.i_thigh
            h[2, jt] += self.i_thigh
            h[jt, 2] += self.i_thigh
            h[jt, jt] += self.i_thigh
            for r in (2, jt, jc):
                for c in (2, jt, jc):
                    h[r, c] += self.i_calf

        return h, bias, grav, foot_pos, foot_vel, foot_jac, pe

    def energy(self, q: np.ndarray, qd: np.ndarray) -> float:
        h, _, _, _, _, _, pe = self.terms(q, qd)
        return float(0.5 * qd @ h @ qd + pe)

    def com_state(self, q: np.ndarray, qd: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Whole-robot CoM position and velocity."""
        h, *_ = self.terms(q, qd)
        # momentum rows: translational rows of H give sum(m_i J_i)
        mom = h[:2] @ qd
        pos = np.zeros(2)
        p = self.params
        l1, l2 = p.thigh_length, p.calf_length
        th = q[2]
        d_w = rot2(th) @ self.trunk_com_offset
        pos += self.trunk_mass * (q[:2] + d_w)
        for leg, sign in enumerate(self.hip_signs):
            jt, jc = 3 + 2 * leg, 4 + 2 * leg
            a = th + q[jt]
            b = a + q[jc]
            hip = q[:2] + sign * p.hip_x * np.array([np.cos(th), np.sin(th)])
            thigh = hip + (l1 / 2.0) * np.array([np.cos(a), np.sin(a)])
            calf = hip + l1 * np.array([np.cos(a), np.sin(a)]) \
                + (l2 / 2.0) * np.array([np.cos(b), np.sin(b)])
            pos += self.m_thigh * thigh + self.m_calf * calf
        return pos / self.total_mass, mom / self.total_mass


def low_level_step(q_ref, qdot_ref, q, qdot, u_ff, theta,
                   gains: LowLevelGains, act: ActuatorParams,
                   params: RobotParams):
    """Joint PD plus force feedforward, then the per-motor clamp.

    Returns (applied lumped torques, per-motor torques, per-motor voltages),
    each (4,). A lumped planar joint stands for a left-right motor pair, so
    each motor carries half the lumped torque.
    """
    tau = gains.kp_joint * (np.asarray(q_ref, dtype=float) - q) \
        + gains.kd_joint * (np.asarray(qdot_ref, dtype=float) - qdot)
    u_ff = np.asarray(u_ff, dtype=float).reshape(2, 2)
    for leg in range(2):
        tau[2 * leg:2 * leg + 2] += force_to_torque(
            u_ff[leg], q[2 * leg:2 * leg + 2], theta, params)

    applied = np.zeros(4)
    tau_motor = np.zeros(4)
    v_motor = np.zeros(4)
    for j in range(4):
        tau_m, v = actuator_clamp(tau[j] / 2.0, qdot[j], act)
        tau_motor[j] = tau_m
        v_motor[j] = v
        applied[j] = 2.0 * tau_m
    return applied, tau_motor, v_motor


class _ContactTracker:
    """Per-foot ground height, box clearance, and stiction anchors."""

    def __init__(self, task: JumpTask):
        self.box = task.box
        self.ground = task.ground
        self.anchors = np.zeros(2)
        self.cleared = [False, False]
        self.collided = False

    def reset_anchors(self, foot_pos: np.ndarray):
        self.anchors = foot_pos[:, 0].copy()

    def force(self, leg: int, pos: np.ndarray, vel: np.ndarray) -> np.ndarray:
        height = 0.0
        if self.box is not None:
            if pos[0] >= self.box.face_x:
                if not self.cleared[leg] and pos[1] >= self.box.height:
                    self.cleared[leg] = True
                if self.cleared[leg]:
                    height = self.box.height
                else:
                    if pos[1] < self.box.height:
                        self.collided = True
                    return np.zeros(2)  # face penetration: flagged, no support
            else:
                self.cleared[leg] = False
        f, self.anchors[leg] = ground_reaction(pos, vel, self.anchors[leg],
                                               self.ground, height)
        return f

    def trunk_hits_box(self, corners: np.ndarray) -> bool:
        if self.box is None:
            return False
        inside = (corners[:, 0] > self.box.face_x) & (corners[:, 1] < self.box.height)
        return bool(np.any(inside))


def _trunk_corners(q: np.ndarray, params: RobotParams) -> np.ndarray:
    half = np.array([params.body_length / 2.0, TRUNK_HEIGHT / 2.0])
    corners_body = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]]) * half
    return q[:2] + corners_body @ rot2(q[2]).T


def attach_payload(task: JumpTask, payload: Payload) -> JumpTask:
    """Attach a payload to the plant; the learner's model is left untouched."""
    return task.with_payload(payload)


def run_trial(u: np.ndarray, refs, task: JumpTask,
              schedule: PhaseSchedule | None = None, *,
              params: RobotParams | None = None,
              act: ActuatorParams | None = None,
              gains: LowLevelGains | None = None,
              substeps: int = 10, settle_time: float = 0.5,
              meta: dict | None = None) -> TrialRecord:
    """Execute one jump on the articulated plant and log it at the sample rate.

    u is the commanded foot-force schedule (n_contact, 4); refs provides
    body_ref, joint_q, joint_qd arrays (see refgen.ReferenceBundle). The plant
    runs 1 kHz control with physics substeps, zero-order-holds u over each
    sample, zeroes the front-leg feedforward after the all-leg phase, and stops
    exactly at sample N.
    """
    schedule = schedule or task.schedule
    params = params or RobotParams()
    act = act or ActuatorParams()
    gains = gains or LowLevelGains()

    n_c, n = schedule.n_contact, schedule.n_total
    u = np.asarray(u, dtype=float).reshape(n_c, 4)
    ticks_per_sample = max(1, int(round(schedule.dt / 1e-3)))
    dt_tick = schedule.dt / ticks_per_sample
    dt_sub = dt_tick / substeps

    model = PlantModel(params, task.payload)
    contact = _ContactTracker(task)

    body_ref = np.asarray(refs.body_ref, dtype=float)
    jq_ref = np.asarray(refs.joint_q, dtype=float)
    jqd_ref = np.asarray(refs.joint_qd, dtype=float)

    # initial configuration implied by the t = 0 references
    q = np.zeros(7)
    q[:3] = body_ref[0, :3]
    q[3:] = jq_ref[0]
    qd = np.zeros(7)

    contact.reset_anchors(model.terms(q, qd)[3])

    def physics(q, qd, tau_lumped, accum=None):
        """Substep integration under one held control tick. Returns (q, qd, ok)."""
        for _ in range(substeps):
            h, bias, grav, fpos, fvel, fjac, _ = model.terms(q, qd)
            forces = np.zeros((2, 2))
            for leg in range(2):
                forces[leg] = contact.force(leg, fpos[leg], fvel[leg])
            if accum is not None:
                accum += forces.reshape(4)
            rhs = -bias - grav
            rhs[3:] += tau_lumped
            for leg in range(2):
                rhs += fjac[leg].T @ forces[leg]
            try:
                qdd = np.linalg.solve(h, rhs)
            except np.linalg.LinAlgError:
                return q, qd, False
            qd = qd + dt_sub * qdd
            q = q + dt_sub * qd
            if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))) \
                    or np.max(np.abs(qd)) > 1e4:
                return q, qd, False
        return q, qd, True

    # settle into the stance equilibrium before the trial clock starts
    for _ in range(int(round(settle_time / dt_tick))):
        tau, _, _ = low_level_step(jq_ref[0], jqd_ref[0], q[3:], qd[3:],
                                   np.zeros(4), q[2], gains, act, params)
        q, qd, ok = physics(q, qd, tau)
        if not ok:
            raise RuntimeError("plant diverged during the settle phase; "
                               "check the stance references")

    body = np.zeros((n + 1, 6))
    joints_q = np.zeros((n + 1, 4))
    joints_qd = np.zeros((n + 1, 4))
    applied_u = np.zeros((n_c, 4))
    torques = np.zeros((n + 1, 4))
    voltages = np.zeros((n + 1, 4))
    foot_log = np.zeros((n + 1, 2, 2))

    failures: list[str] = []
    failure_tick = None

    def snapshot(t):
        body[t, :3] = q[:3]
        body[t, 3:] = qd[:3]
        joints_q[t] = q[3:]
        joints_qd[t] = qd[3:]
        foot_log[t] = model.terms(q, qd)[3]

    snapshot(0)

    diverged = False
    for t in range(n):
        if diverged:
            body[t + 1] = body[t]
            joints_q[t + 1] = joints_q[t]
            joints_qd[t + 1] = joints_qd[t]
            torques[t + 1] = torques[t]
            voltages[t + 1] = voltages[t]
            foot_log[t + 1] = foot_log[t]
            continue

        if t < n_c:
            u_cmd = u[t].copy()
            if not schedule.front_in_contact(t):
                u_cmd[:2] = 0.0
        else:
            u_cmd = np.zeros(4)

        accum = np.zeros(4) if t < n_c else None
        for tick in range(ticks_per_sample):
            frac = tick / ticks_per_sample
            qr = jq_ref[t] + frac * (jq_ref[t + 1] - jq_ref[t])
            qdr = jqd_ref[t] + frac * (jqd_ref[t + 1] - jqd_ref[t])
            tau, tau_m, v_m = low_level_step(qr, qdr, q[3:], qd[3:], u_cmd,
                                             q[2], gains, act, params)
            if tick == 0:
                torques[t] = tau_m
                voltages[t] = v_m
            q, qd, ok = physics(q, qd, tau, accum)
            if not ok:
                failures.append(FAIL_DIVERGENCE)
                failure_tick = t * ticks_per_sample + tick
                diverged = True
                q = np.nan_to_num(q, nan=0.0, posinf=0.0, neginf=0.0)
                qd = np.nan_to_num(qd, nan=0.0, posinf=0.0, neginf=0.0)
                break
            if contact.trunk_hits_box(_trunk_corners(q, params)):
                contact.collided = True

        if accum is not None:
            applied_u[t] = accum / (ticks_per_sample * substeps)
        snapshot(t + 1)

    torques[n] = torques[n - 1]
    voltages[n] = voltages[n - 1]

    if contact.collided:
        failures.append(FAIL_COLLISION)
    if abs(body[n, 2]) > BAD_LANDING_ANGLE and not diverged:
        failures.append(FAIL_BAD_LANDING)

    errors = body_ref - body
    return TrialRecord(body=body, body_ref=body_ref.copy(),
                       joints_q=joints_q, joints_qd=joints_qd,
                       joint_ref_q=jq_ref.copy(), joint_ref_qd=jqd_ref.copy(),
                       applied_u=applied_u, commanded_u=u.copy(),
                       torques=torques, voltages=voltages, errors=errors,
                       foot_pos=foot_log, failures=tuple(failures),
                       failure_tick=failure_tick, meta=dict(meta or {}))
