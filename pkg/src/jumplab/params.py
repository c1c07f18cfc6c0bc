"""Physical parameter bundles shared by the model, the simulator, and the learner."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

GRAVITY = 9.81

# A1-class platform constants: body/link length 0.366 / 0.2 m, body/thigh/calf
# weight 9.60 / 1.61 / 0.66 kg, joint limits 33.5 Nm and 21 rad/s, 21.5 V supply.
BODY_LENGTH = 0.366
LINK_LENGTH = 0.2
TRUNK_MASS = 9.60
THIGH_MASS = 1.61
CALF_MASS = 0.66
TRUNK_HEIGHT = 0.114
TAU_MAX = 33.5
QDOT_MAX = 21.0
V_BAT = 21.5


def _box_inertia(mass: float, length: float, height: float) -> float:
    return mass * (length**2 + height**2) / 12.0


@dataclass(frozen=True)
class RobotParams:
    """Trunk and leg parameters of the planar robot.

    The trunk mass/inertia double as the single-rigid-body model the learner
    uses; leg link masses only exist in the articulated plant.
    """

    trunk_mass: float = TRUNK_MASS
    trunk_inertia: float = _box_inertia(TRUNK_MASS, BODY_LENGTH, TRUNK_HEIGHT)
    body_length: float = BODY_LENGTH
    thigh_length: float = LINK_LENGTH
    calf_length: float = LINK_LENGTH
    thigh_mass: float = THIGH_MASS
    calf_mass: float = CALF_MASS
    gravity: float = GRAVITY

    def __post_init__(self):
        for name in ("trunk_mass", "trunk_inertia", "body_length", "thigh_length",
                     "calf_length", "thigh_mass", "calf_mass", "gravity"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"RobotParams.{name} must be finite and > 0, got {v}")

    @property
    def hip_x(self) -> float:
        """Hip offset from the trunk center along the body x axis."""
        return self.body_length / 2.0

    @property
    def max_reach(self) -> float:
        return self.thigh_length + self.calf_length


@dataclass(frozen=True)
class ActuatorParams:
    """Per-motor torque, speed, and supply-voltage limits.

    rho maps torque to voltage (winding resistance over torque constant and
    gear ratio), sigma maps joint speed to back-EMF voltage. Defaults are
    derived so the stall torque exactly saturates the supply and the no-load
    speed equals the joint speed limit.
    """

    tau_max: float = TAU_MAX
    qdot_max: float = QDOT_MAX
    v_bat: float = V_BAT
    rho: float = V_BAT / TAU_MAX
    sigma: float = V_BAT / QDOT_MAX

    def __post_init__(self):
        for name in ("tau_max", "qdot_max", "v_bat", "rho", "sigma"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0.0:
                raise ValueError(f"ActuatorParams.{name} must be finite and > 0, got {v}")
        # no-load speed v_bat/sigma must cover the joint speed limit (1% slack)
        if self.v_bat / self.sigma < 0.99 * self.qdot_max:
            raise ValueError(
                f"inconsistent actuator params: v_bat/sigma = {self.v_bat / self.sigma:.3f} "
                f"< qdot_max = {self.qdot_max:.3f}")


@dataclass(frozen=True)
class PhaseSchedule:
    """Sample counts of the contact/flight phases and the learner sample period.

    n_dc: all-leg contact, n_sc: rear-leg contact, n_fl: flight.
    """

    n_dc: int = 30
    n_sc: int = 20
    n_fl: int = 40
    dt: float = 0.01

    def __post_init__(self):
        if min(self.n_dc, self.n_sc, self.n_fl) < 1:
            raise ValueError("phase sample counts must all be >= 1")
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")

    @property
    def n_contact(self) -> int:
        return self.n_dc + self.n_sc

    @property
    def n_total(self) -> int:
        return self.n_contact + self.n_fl

    @property
    def t_contact(self) -> float:
        return self.n_contact * self.dt

    @property
    def t_flight(self) -> float:
        return self.n_fl * self.dt

    def phase_of(self, t: int) -> str:
        """Phase label of state sample t (dc | sc | fl)."""
        if t < self.n_dc:
            return "dc"
        if t < self.n_contact:
            return "sc"
        return "fl"

    def front_in_contact(self, t: int) -> bool:
        """Whether the front foot is scheduled stance at input sample t."""
        return t < self.n_dc

    def rear_in_contact(self, t: int) -> bool:
        return t < self.n_contact


@dataclass(frozen=True)
class GroundModel:
    """Spring-damper ground with a stiction-anchor friction model."""

    k_p: float = 2e4
    k_d: float = 3e3
    mu: float = 0.6
    tangential_stiffness: float = 2e4
    tangential_damping: float = 3e2

    def __post_init__(self):
        if min(self.k_p, self.k_d, self.mu) <= 0.0:
            raise ValueError("ground stiffness, damping, and friction must be > 0")


SOFT_GROUND = GroundModel(k_p=2e3, k_d=5e2)
HARD_GROUND = GroundModel(k_p=2e4, k_d=3e3)

GROUND_PRESETS = {"soft": SOFT_GROUND, "hard": HARD_GROUND}


@dataclass(frozen=True)
class Payload:
    """Point mass rigidly attached to the trunk, unknown to the learner."""

    mass: float = 0.0
    offset: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.mass < 0.0:
            raise ValueError("payload mass must be >= 0")


@dataclass(frozen=True)
class LowLevelGains:
    """Joint PD gains of the 1 kHz low-level controller (lumped planar joint)."""

    kp_joint: float = 100.0
    kd_joint: float = 2.0

    def __post_init__(self):
        if self.kp_joint < 0.0 or self.kd_joint < 0.0:
            raise ValueError("joint PD gains must be >= 0")


@dataclass(frozen=True)
class ForceBounds:
    """Stance-foot force limits used by the reference generator and the learner."""

    f_min: float = 5.0
    f_max: float = 250.0

    def __post_init__(self):
        if not (0.0 < self.f_min < self.f_max):
            raise ValueError("need 0 < f_min < f_max")
