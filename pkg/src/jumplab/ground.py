"""Spring-damper ground contact with stiction-anchor friction.

The normal force is a one-sided spring-damper on penetration; the tangential
force is a spring-damper on the slip from a per-foot anchor point, clamped to
the friction cone. When the clamp engages, the anchor slips so the spring
never stores more force than friction can hold.
"""

from __future__ import annotations

import numpy as np

from .params import GroundModel


def ground_reaction(foot_pos: np.ndarray, foot_vel: np.ndarray, anchor: float,
                    ground: GroundModel, ground_height: float = 0.0,
                    ) -> tuple[np.ndarray, float]:
    """Contact force (f_x, f_z) at one foot and the updated stiction anchor."""
    x, z = float(foot_pos[0]), float(foot_pos[1])
    vx, vz = float(foot_vel[0]), float(foot_vel[1])

    depth = ground_height - z
    if depth <= 0.0:
        return np.zeros(2), x

    f_z = ground.k_p * depth + ground.k_d * (-vz)
    if f_z <= 0.0:
        return np.zeros(2), x

    f_x = -ground.tangential_stiffness * (x - anchor) - ground.tangential_damping * vx
    f_max = ground.mu * f_z
    if abs(f_x) > f_max:
        f_x = np.sign(f_x) * f_max
        # slip: move the anchor so the spring alone would hold exactly f_x
        anchor = x + (f_x + ground.tangential_damping * vx) / ground.tangential_stiffness
    return np.array([f_x, f_z]), anchor
