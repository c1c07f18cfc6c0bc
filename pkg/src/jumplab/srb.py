"""Planar single-rigid-body model and its discrete-time form.

State vector x = [p_x, p_z, theta, v_x, v_z, omega]. Forces act at the feet in
the world frame; the moment about the CoM uses the planar cross product
r_x*f_z - r_z*f_x. The discrete model is the explicit-Euler form
x_{t+1} = A x_t + B_t u_t + c with gravity kept as the constant offset c, so
the same matrices drive both forward rollouts and the trial-difference error
model (where c cancels).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import PhaseSchedule, RobotParams


class ModelInputError(ValueError):
    """Raised for non-finite or mis-shaped model inputs."""


class DimensionError(ValueError):
    """Raised when sequence lengths disagree with the phase schedule."""


@dataclass(frozen=True)
class BodyState:
    """Trunk state: position, pitch, and their rates."""

    p_x: float
    p_z: float
    theta: float
    v_x: float
    v_z: float
    omega: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.as_vector())):
            raise ModelInputError(f"non-finite body state: {self}")

    def as_vector(self) -> np.ndarray:
        return np.array([self.p_x, self.p_z, self.theta, self.v_x, self.v_z, self.omega])

    @staticmethod
    def from_vector(x: np.ndarray) -> "BodyState":
        x = np.asarray(x, dtype=float).reshape(6)
        return BodyState(*x)


@dataclass(frozen=True)
class FootGeometry:
    """Foot positions relative to the CoM, world frame: (front, rear)."""

    r_front: tuple[float, float]
    r_rear: tuple[float, float]

    def as_array(self) -> np.ndarray:
        return np.array([self.r_front, self.r_rear], dtype=float)


@dataclass(frozen=True)
class DiscreteModel:
    """Sampled linear model: one shared A, one 6x4 input matrix per contact sample."""

    a_mat: np.ndarray            # (6, 6)
    b_mats: np.ndarray           # (n_contact, 6, 4)
    c_vec: np.ndarray            # (6,) constant gravity offset
    dt: float


def srb_continuous_accel(state: BodyState, forces: np.ndarray, feet: FootGeometry,
                         params: RobotParams) -> tuple[np.ndarray, float]:
    """Continuous-time CoM acceleration and pitch acceleration.

    forces is (2, 2): rows (front, rear), columns (f_x, f_z), world frame.
    """
    forces = np.asarray(forces, dtype=float).reshape(2, 2)
    if not np.all(np.isfinite(forces)):
        raise ModelInputError("non-finite foot forces")
    r = feet.as_array()
    if not np.all(np.isfinite(r)):
        raise ModelInputError("non-finite foot geometry")

    lin = forces.sum(axis=0) / params.trunk_mass - np.array([0.0, params.gravity])
    moment = float(np.sum(r[:, 0] * forces[:, 1] - r[:, 1] * forces[:, 0]))
    return lin, moment / params.trunk_inertia


def input_matrix(feet: FootGeometry, params: RobotParams, dt: float) -> np.ndarray:
    """6x4 discrete input matrix for one sample: columns (front fx, fz, rear fx, fz)."""
    b = np.zeros((6, 4))
    m = params.trunk_mass
    inertia = params.trunk_inertia
    r = feet.as_array()
    for i in range(2):
        b[3, 2 * i] = dt / m
        b[4, 2 * i + 1] = dt / m
        b[5, 2 * i] = -dt * r[i, 1] / inertia
        b[5, 2 * i + 1] = dt * r[i, 0] / inertia
    return b


def transition_matrix(dt: float) -> np.ndarray:
    a = np.eye(6)
    a[0, 3] = a[1, 4] = a[2, 5] = dt
    return a


def gravity_offset(params: RobotParams, dt: float) -> np.ndarray:
    c = np.zeros(6)
    c[4] = -dt * params.gravity
    return c


def discretize(feet_per_sample: list[FootGeometry], schedule: PhaseSchedule,
               params: RobotParams) -> DiscreteModel:
    """Discrete model from per-contact-sample foot geometry.

    Swing-foot columns are kept (uniform dimensions); the phase equality
    constraints zero their inputs downstream.
    """
    if len(feet_per_sample) != schedule.n_contact:
        raise DimensionError(
            f"need one FootGeometry per contact sample "
            f"({schedule.n_contact}), got {len(feet_per_sample)}")
    b_mats = np.stack([input_matrix(f, params, schedule.dt) for f in feet_per_sample])
    return DiscreteModel(a_mat=transition_matrix(schedule.dt), b_mats=b_mats,
                         c_vec=gravity_offset(params, schedule.dt), dt=schedule.dt)


def euler_step(model: DiscreteModel, x: np.ndarray, u: np.ndarray, t: int) -> np.ndarray:
    """One discrete-model step at contact sample t (u stacked (4,))."""
    return model.a_mat @ x + model.b_mats[t] @ u + model.c_vec


def rollout(model: DiscreteModel, x0: np.ndarray, u_seq: np.ndarray,
            n_total: int) -> np.ndarray:
    """Roll the discrete model over the whole trial; zero input after contact.

    Returns states (n_total + 1, 6) including the initial state.
    """
    n_c = model.b_mats.shape[0]
    xs = np.zeros((n_total + 1, 6))
    xs[0] = x0
    x = np.asarray(x0, dtype=float).copy()
    for t in range(n_total):
        if t < n_c:
            x = euler_step(model, x, u_seq[t], t)
        else:
            x = model.a_mat @ x + model.c_vec
        xs[t + 1] = x
    return xs
