import dataclasses

import pytest
import numpy as np
from hypothesis import assume, given, strategies as st

from hrsglab.calibration import CalibrationInfeasible, calibrate
from hrsglab.config import ControlConfig, PlantConfig

PC = PlantConfig()


def equilibrium(pc, u):
    # the hand-copied right-hand side is linear in (x1, x2): solve A x = b directly
    d4 = pc.t_gt_nominal - pc.dsh_offset
    flow = pc.d2 + u
    A = np.array([[-flow, flow], [0.0, -flow]])
    b = np.array([pc.d3 - pc.k1 * pc.d1, u * (d4 - pc.d5) - flow * d4])
    return np.linalg.solve(A, b)


def test_default_targets_give_heat_input_32():
    rep = calibrate(PC)
    assert rep.heat_input == pytest.approx(32.0, abs=1e-9)
    assert rep.plant.k2 == pytest.approx(1.0 / (100.0 * 65.8))
    assert rep.plant.k3 == pytest.approx(1.0 / (30.0 * 65.8))


def test_calibrated_equilibrium_matches_root_finder():
    rep = calibrate(PC)
    x1, x2 = equilibrium(rep.plant, PC.u_target)
    assert rep.ok
    assert abs(x1 - 515.0) <= 1e-6
    assert rep.y_eq == pytest.approx(x1, abs=1e-6)
    assert rep.x2_eq == pytest.approx(x2, abs=1e-6)


def test_shipped_defaults_are_the_calibrated_constants():
    rep = calibrate(PC)
    assert (PC.k1, PC.k2, PC.k3) == pytest.approx((rep.plant.k1, rep.plant.k2, rep.plant.k3),
                                                  rel=1e-12)


def test_calibration_is_idempotent():
    once = calibrate(PC)
    twice = calibrate(once.plant)
    assert twice.plant == once.plant


def test_target_below_desuperheater_outlet_is_infeasible():
    with pytest.raises(CalibrationInfeasible, match="achievable targets"):
        calibrate(dataclasses.replace(PC, y_target=400.0))


def test_spray_outside_valve_range_is_infeasible():
    with pytest.raises(CalibrationInfeasible, match="valve range"):
        calibrate(dataclasses.replace(PC, u_target=2.5), ControlConfig())


@given(st.floats(515.0, 560.0), st.floats(0.1, 1.9))
def test_any_feasible_target_is_hit(y, u):
    d4 = PC.t_gt_nominal - PC.dsh_offset
    assume(y > d4 - u * (d4 - PC.d5) / (PC.d2 + u) + 1e-3)
    rep = calibrate(dataclasses.replace(PC, y_target=y, u_target=u))
    assert rep.residual <= 1e-6
    assert rep.heat_input > 0
