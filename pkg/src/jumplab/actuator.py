"""Motor torque saturation and the torque-speed voltage feasibility clamp."""

from __future__ import annotations

import numpy as np

from .params import ActuatorParams


def actuator_clamp(tau_cmd: float, qdot: float,
                   act: ActuatorParams) -> tuple[float, float]:
    """Clamp one motor's torque command and estimate its supply voltage.

    The torque is first limited by saturation, then by the voltage budget
    v = rho*tau + sigma*qdot, |v| <= v_bat. At the no-load speed the available
    torque against the back-EMF is zero.
    """
    tau = float(np.clip(tau_cmd, -act.tau_max, act.tau_max))
    lo = (-act.v_bat - act.sigma * qdot) / act.rho
    hi = (act.v_bat - act.sigma * qdot) / act.rho
    tau = float(np.clip(tau, lo, hi))
    v_est = act.rho * tau + act.sigma * qdot
    return tau, float(v_est)


def mdc_interval(qdot: float, act: ActuatorParams) -> tuple[float, float]:
    """Voltage-feasible torque interval at a measured joint speed."""
    return ((-act.v_bat - act.sigma * qdot) / act.rho,
            (act.v_bat - act.sigma * qdot) / act.rho)
