import numpy as np
import pytest

from jumplab.actuator import actuator_clamp, mdc_interval
from jumplab.params import ActuatorParams

ACT = ActuatorParams()


def test_stall_saturation_maps_to_supply_voltage():
    tau, v = actuator_clamp(50.0, 0.0, ACT)
    assert tau == pytest.approx(33.5)
    assert v == pytest.approx(21.5)


def test_no_torque_available_at_top_speed():
    tau, v = actuator_clamp(10.0, ACT.qdot_max, ACT)
    assert tau == pytest.approx(0.0, abs=1e-12)
    assert abs(v) <= ACT.v_bat + 1e-12


def test_zero_command_feasible_over_speed_range():
    for qdot in np.linspace(-ACT.qdot_max, ACT.qdot_max, 9):
        tau, v = actuator_clamp(0.0, qdot, ACT)
        assert tau == 0.0
        assert abs(v) <= ACT.v_bat + 1e-12


def test_voltage_always_within_supply():
    rng = np.random.default_rng(5)
    for _ in range(500):
        tau_cmd = rng.uniform(-80, 80)
        qdot = rng.uniform(-25, 25)
        tau, v = actuator_clamp(tau_cmd, qdot, ACT)
        assert abs(tau) <= ACT.tau_max + 1e-12
        assert abs(v) <= ACT.v_bat + 1e-9


def test_mdc_interval_at_rest_meets_saturation():
    lo, hi = mdc_interval(0.0, ACT)
    assert lo == pytest.approx(-33.5)
    assert hi == pytest.approx(33.5)


def test_params_consistency_guard():
    with pytest.raises(ValueError):
        ActuatorParams(sigma=2.0)  # no-load speed would fall below qdot_max
