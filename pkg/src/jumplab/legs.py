"""Two-link planar leg kinematics and the force-to-torque map.

Conventions: the thigh angle is measured from the body +x axis, the calf angle
is relative to the thigh, pitch is positive nose-up. The knee-backward branch
(calf angle <= 0) is used everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import RobotParams


class KinematicsError(ValueError):
    """Raised when an inverse-kinematics target is out of reach."""


@dataclass(frozen=True)
class LegState:
    """Joint angles and rates of one planar leg (thigh, calf)."""

    q: tuple[float, float]
    qdot: tuple[float, float] = (0.0, 0.0)

    def q_vec(self) -> np.ndarray:
        return np.array(self.q, dtype=float)

    def qdot_vec(self) -> np.ndarray:
        return np.array(self.qdot, dtype=float)


def rot2(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def foot_in_hip_frame(q: np.ndarray, params: RobotParams) -> np.ndarray:
    q1, q2 = float(q[0]), float(q[1])
    l1, l2 = params.thigh_length, params.calf_length
    return np.array([l1 * np.cos(q1) + l2 * np.cos(q1 + q2),
                     l1 * np.sin(q1) + l2 * np.sin(q1 + q2)])


def leg_fk(q: np.ndarray, hip_offset: np.ndarray, theta: float,
           params: RobotParams, com: np.ndarray | None = None) -> np.ndarray:
    """World foot position: CoM + R(theta) (hip_offset + two-link chain)."""
    com = np.zeros(2) if com is None else np.asarray(com, dtype=float)
    body = np.asarray(hip_offset, dtype=float) + foot_in_hip_frame(np.asarray(q, float), params)
    return com + rot2(theta) @ body


def leg_ik(foot_hip_frame: np.ndarray, params: RobotParams) -> np.ndarray:
    """Joint angles (thigh, calf) for a hip-frame foot target, knee-backward branch."""
    x, z = float(foot_hip_frame[0]), float(foot_hip_frame[1])
    l1, l2 = params.thigh_length, params.calf_length
    d2 = x * x + z * z
    d = np.sqrt(d2)
    lo, hi = abs(l1 - l2), l1 + l2
    if d > hi * (1.0 + 1e-12):
        raise KinematicsError(f"target at distance {d:.4f} m exceeds max reach {hi:.4f} m")
    if d < lo * (1.0 - 1e-12):
        raise KinematicsError(f"target at distance {d:.4f} m inside min reach {lo:.4f} m")
    cos_q2 = np.clip((d2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0)
    q2 = -np.arccos(cos_q2)
    q1 = np.arctan2(z, x) - np.arctan2(l2 * np.sin(q2), l1 + l2 * np.cos(q2))
    return np.array([q1, q2])


def leg_jacobian(q: np.ndarray, params: RobotParams) -> np.ndarray:
    """2x2 map from joint rates to hip-frame foot velocity."""
    q1, q2 = float(q[0]), float(q[1])
    l1, l2 = params.thigh_length, params.calf_length
    s1, c1 = np.sin(q1), np.cos(q1)
    s12, c12 = np.sin(q1 + q2), np.cos(q1 + q2)
    return np.array([[-l1 * s1 - l2 * s12, -l2 * s12],
                     [l1 * c1 + l2 * c12, l2 * c12]])


def force_to_torque(u_world: np.ndarray, q: np.ndarray, theta: float,
                    params: RobotParams) -> np.ndarray:
    """Joint torques realizing a world-frame ground force at the foot: J^T R^T u."""
    jac = leg_jacobian(q, params)
    return jac.T @ rot2(theta).T @ np.asarray(u_world, dtype=float)
