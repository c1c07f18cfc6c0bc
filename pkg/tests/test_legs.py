import numpy as np
import pytest

from jumplab.legs import (KinematicsError, force_to_torque, foot_in_hip_frame,
                          leg_fk, leg_ik, leg_jacobian, rot2)
from jumplab.params import RobotParams

PARAMS = RobotParams()


def test_fk_perpendicular_links_distance():
    q = np.deg2rad([45.0, -90.0])
    foot = foot_in_hip_frame(q, PARAMS)
    assert np.linalg.norm(foot) == pytest.approx(np.sqrt(0.2**2 + 0.2**2), abs=1e-12)


def test_fk_straight_leg():
    foot = foot_in_hip_frame(np.array([0.0, 0.0]), PARAMS)
    assert np.allclose(foot, [0.4, 0.0], atol=1e-12)


def test_fk_identity_rotation_at_zero_pitch():
    q = np.deg2rad([-60.0, -40.0])
    body = foot_in_hip_frame(q, PARAMS)
    world = leg_fk(q, np.zeros(2), 0.0, PARAMS)
    assert np.allclose(world, body, atol=1e-15)


def test_ik_straight_down():
    q = leg_ik(np.array([0.0, -0.4]), PARAMS)
    assert np.allclose(np.rad2deg(q), [-90.0, 0.0], atol=1e-9)


def test_ik_perpendicular_calf():
    q = leg_ik(np.array([0.0, -np.sqrt(0.08)]), PARAMS)
    assert np.rad2deg(q[1]) == pytest.approx(-90.0, abs=1e-9)
    assert q[1] <= 0.0


def test_ik_out_of_reach():
    with pytest.raises(KinematicsError, match="0.4"):
        leg_ik(np.array([0.0, -0.5]), PARAMS)


def test_fk_ik_roundtrip_1000():
    rng = np.random.default_rng(11)
    count = 0
    while count < 1000:
        p = rng.uniform(-0.4, 0.4, 2)
        d = np.linalg.norm(p)
        if not 0.02 < d < 0.399:
            continue
        count += 1
        q = leg_ik(p, PARAMS)
        assert q[1] <= 1e-12
        assert np.allclose(foot_in_hip_frame(q, PARAMS), p, atol=1e-9)


def test_jacobian_singular_when_straight():
    j = leg_jacobian(np.array([-np.pi / 2, 0.0]), PARAMS)
    assert abs(np.linalg.det(j)) < 1e-15


def test_jacobian_determinant_closed_form():
    j = leg_jacobian(np.deg2rad([45.0, -90.0]), PARAMS)
    assert abs(np.linalg.det(j)) == pytest.approx(0.2 * 0.2, abs=1e-12)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(19)
    h = 1e-7
    worst = 0.0
    for _ in range(100):
        q = rng.uniform(-2.0, 2.0, 2)
        j = leg_jacobian(q, PARAMS)
        fd = np.zeros((2, 2))
        for k in range(2):
            dq = np.zeros(2)
            dq[k] = h
            fd[:, k] = (foot_in_hip_frame(q + dq, PARAMS)
                        - foot_in_hip_frame(q - dq, PARAMS)) / (2 * h)
        worst = max(worst, np.max(np.abs(j - fd)))
    assert worst < 1e-6


def test_force_to_torque_zero_and_linearity():
    q = np.deg2rad([-50.0, -70.0])
    assert np.allclose(force_to_torque(np.zeros(2), q, 0.2, PARAMS), 0.0)
    rng = np.random.default_rng(23)
    for _ in range(50):
        u, v = rng.normal(size=2), rng.normal(size=2)
        a, b = rng.normal(size=2)
        theta = rng.uniform(-1, 1)
        lhs = force_to_torque(a * u + b * v, q, theta, PARAMS)
        rhs = a * force_to_torque(u, q, theta, PARAMS) \
            + b * force_to_torque(v, q, theta, PARAMS)
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_axial_force_through_straight_leg_gives_zero_calf_torque():
    q = leg_ik(np.array([0.0, -0.4]), PARAMS)
    tau = force_to_torque(np.array([0.0, 150.0]), q, 0.0, PARAMS)
    assert tau[1] == pytest.approx(0.0, abs=1e-10)


def test_force_to_torque_scaling():
    q = np.deg2rad([-40.0, -80.0])
    u = np.array([12.0, 80.0])
    assert np.allclose(force_to_torque(2 * u, q, 0.1, PARAMS),
                       2 * force_to_torque(u, q, 0.1, PARAMS), atol=1e-13)


def test_rot2_orthonormal():
    r = rot2(0.7)
    assert np.allclose(r @ r.T, np.eye(2), atol=1e-15)
