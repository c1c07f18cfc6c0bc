import numpy as np
import pytest

from jumplab.params import PhaseSchedule, RobotParams
from jumplab.srb import (BodyState, DiscreteModel, DimensionError, FootGeometry,
                         ModelInputError, discretize, euler_step, gravity_offset,
                         input_matrix, srb_continuous_accel, transition_matrix)


def make_params(m=9.60, inertia=0.15):
    return RobotParams(trunk_mass=m, trunk_inertia=inertia)


STAND = BodyState(0.0, 0.3, 0.0, 0.0, 0.0, 0.0)
FEET = FootGeometry(r_front=(0.183, -0.3), r_rear=(-0.183, -0.3))


def test_free_fall():
    lin, ang = srb_continuous_accel(STAND, np.zeros((2, 2)), FEET, make_params())
    assert np.allclose(lin, [0.0, -9.81])
    assert ang == 0.0


def test_single_rear_foot_hand_computed():
    feet = FootGeometry(r_front=(0.2, -0.3), r_rear=(-0.1, -0.25))
    forces = np.array([[0.0, 0.0], [0.0, 117.7]])
    lin, ang = srb_continuous_accel(STAND, forces, feet, make_params())
    assert lin[1] == pytest.approx(117.7 / 9.60 - 9.81, abs=1e-12)
    assert lin[0] == 0.0
    assert ang == pytest.approx(-0.1 * 117.7 / 0.15, abs=1e-12)


def test_mirrored_horizontal_forces_pure_torque():
    feet = FootGeometry(r_front=(0.2, -0.25), r_rear=(-0.2, -0.35))
    forces = np.array([[5.0, 0.0], [-5.0, 0.0]])
    lin, ang = srb_continuous_accel(STAND, forces, feet, make_params())
    assert np.allclose(lin, [0.0, -9.81])
    # torque = -r_z1*fx1 - r_z2*fx2 = 0.25*5 - 0.35*5
    assert ang == pytest.approx((0.25 * 5.0 - 0.35 * 5.0) / 0.15, abs=1e-12)


def test_nonfinite_force_rejected():
    with pytest.raises(ModelInputError):
        srb_continuous_accel(STAND, np.array([[np.nan, 0], [0, 0]]), FEET, make_params())


def test_transition_matrix_coupling():
    a = transition_matrix(0.01)
    assert np.allclose(np.diag(a), 1.0)
    for pos, vel in ((0, 3), (1, 4), (2, 5)):
        assert a[pos, vel] == 0.01
    off = a - np.eye(6)
    off[0, 3] = off[1, 4] = off[2, 5] = 0.0
    assert np.all(off == 0.0)


def test_force_rows_dt_over_m():
    b = input_matrix(FEET, make_params(), 0.01)
    expect = 0.01 / 9.60
    assert b[3, 0] == pytest.approx(expect, rel=1e-12)
    assert b[3, 2] == pytest.approx(expect, rel=1e-12)
    assert b[4, 1] == pytest.approx(expect, rel=1e-12)
    assert b[4, 3] == pytest.approx(expect, rel=1e-12)
    assert np.all(b[:3] == 0.0)


def test_moment_row_hand_computed():
    feet = FootGeometry(r_front=(0.2, -0.3), r_rear=(-0.1, -0.25))
    b = input_matrix(feet, make_params(), 0.01)
    assert b[5, 2] == pytest.approx(0.01 * 0.25 / 0.15, rel=1e-12)
    assert b[5, 3] == pytest.approx(0.01 * (-0.1) / 0.15, rel=1e-12)


def test_moment_row_linear_in_foot_position():
    params = make_params()
    rng = np.random.default_rng(3)
    for _ in range(20):
        rx, rz, dx = rng.uniform(-0.3, 0.3, 3)
        b0 = input_matrix(FootGeometry((0.2, -0.3), (rx, rz)), params, 0.01)
        b1 = input_matrix(FootGeometry((0.2, -0.3), (rx + dx, rz)), params, 0.01)
        assert b1[5, 3] - b0[5, 3] == pytest.approx(0.01 * dx / params.trunk_inertia,
                                                    abs=1e-14)


def test_discretize_wrong_length():
    sched = PhaseSchedule(n_dc=3, n_sc=2, n_fl=4)
    with pytest.raises(DimensionError):
        discretize([FEET] * 4, sched, make_params())


def test_discrete_step_matches_continuous_euler():
    """One explicit-Euler step of the continuous model equals A x + B u + c."""
    params = make_params()
    sched = PhaseSchedule(n_dc=2, n_sc=2, n_fl=2)
    rng = np.random.default_rng(7)
    feet = [FootGeometry(tuple(rng.uniform(-0.3, 0.3, 2)),
                         tuple(rng.uniform(-0.3, 0.3, 2)))
            for _ in range(sched.n_contact)]
    model = discretize(feet, sched, params)
    for t in range(sched.n_contact):
        x = rng.normal(size=6)
        u = rng.normal(scale=50.0, size=4)
        state = BodyState.from_vector(x)
        lin, ang = srb_continuous_accel(state, u.reshape(2, 2), feet[t], params)
        euler = x.copy()
        euler[:3] += sched.dt * x[3:]
        euler[3:5] += sched.dt * lin
        euler[5] += sched.dt * ang
        assert np.allclose(euler_step(model, x, u, t), euler, atol=1e-12)


def test_gravity_offset_on_vertical_velocity_row():
    c = gravity_offset(make_params(), 0.01)
    assert c[4] == pytest.approx(-0.01 * 9.81)
    c[4] = 0.0
    assert np.all(c == 0.0)
