import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewalk.control import (
    BaseState,
    Controller,
    InfeasibleContactError,
    RobotModel,
    _leg_constraints,
    _wrench_matrix,
    apply_turning_offset,
    check_constraints,
    contact_basis,
    desired_base_pose,
    distribute_forces,
    estimate_terrain,
    stance_torques,
    swing_pd,
    virtual_wrench,
)
from slopewalk.geom import Rotation3
from slopewalk.kinematics import JointState, inverse_kinematics, jacobian

from oracles import qp_grid_min

MODEL = RobotModel()
HX, HY = np.array([0.25, 0.25, -0.25, -0.25]), np.array([0.15, -0.15, 0.15, -0.15])
NAMES = ("LF", "RF", "LH", "RH")


def plane_feet(pitch_deg, roll_deg=0.0, h=0.38):
    z = -h - math.tan(math.radians(pitch_deg)) * HX + math.tan(math.radians(roll_deg)) * HY
    return np.column_stack([HX, HY, z])


def leg_jacobians(feet: dict, model=MODEL) -> dict:
    legs = model.legs
    out = {}
    for leg, p in feet.items():
        a = legs[leg].attachment
        q = inverse_kinematics(legs[leg], (p[0] - a[0], p[2] - a[2]))
        out[leg] = jacobian(legs[leg], q)
    return out


# -- estimation -----------------------------------------------------------------


def test_flat_estimate_is_identity():
    est = estimate_terrain(plane_feet(0.0), Rotation3.identity())
    assert est.valid
    assert np.allclose(est.C_BF.as_matrix(), np.eye(3), atol=1e-12)
    assert np.allclose(est.C_WF.as_matrix(), np.eye(3), atol=1e-12)
    assert np.allclose(est.normal, [0, 0, 1], atol=1e-12)


@given(st.floats(-30, 30))
def test_estimate_exact_on_coplanar_points(pitch):
    est = estimate_terrain(plane_feet(pitch), Rotation3.identity())
    assert math.degrees(est.pitch) == pytest.approx(pitch, abs=1e-9)
    assert np.linalg.norm(est.normal) == pytest.approx(1.0, abs=1e-12)
    assert est.normal[2] > 0


def test_estimate_composes_with_imu():
    imu = Rotation3.from_rpy(0.0, math.radians(10.0), 0.3)
    est = estimate_terrain(plane_feet(15.0), imu)
    assert math.degrees(est.C_WF.rpy()[1]) == pytest.approx(25.0, abs=1e-9)
    assert np.allclose(est.C_WF.as_matrix(), (imu * est.C_BF).as_matrix())


def test_estimate_monte_carlo_noise():
    rng = np.random.default_rng(7)
    errs = []
    for _ in range(1000):
        pts = plane_feet(25.0)
        pts[:, 2] += rng.uniform(-0.005, 0.005, 4)
        errs.append(abs(math.degrees(estimate_terrain(pts, Rotation3.identity()).pitch) - 25.0))
    assert np.mean(errs) <= 0.5


def test_estimate_degenerate():
    assert not estimate_terrain(plane_feet(0)[:2], Rotation3.identity()).valid
    line = np.array([[0.0, 0, -0.38], [0.1, 0, -0.38], [0.2, 0, -0.38]])
    assert not estimate_terrain(line, Rotation3.identity()).valid


def test_controller_keeps_previous_estimate():
    ctrl = Controller(MODEL)
    feet = dict(zip(NAMES, plane_feet(20.0)))
    first = ctrl.update_estimate(feet, Rotation3.identity())
    two = {k: feet[k] for k in ("LF", "RF")}
    kept = ctrl.update_estimate(two, Rotation3.identity())
    assert np.allclose(kept.normal, first.normal)


# -- base target and swing ---------------------------------------------------------


def test_desired_pose_flat_and_pitched():
    t = desired_base_pose(estimate_terrain(plane_feet(0), Rotation3.identity()), MODEL)
    assert np.allclose(t.orientation.as_matrix(), np.eye(3), atol=1e-12)
    assert np.allclose(t.position, [0, 0, 0.38], atol=1e-12)
    t = desired_base_pose(estimate_terrain(plane_feet(25, 8), Rotation3.identity()), MODEL)
    roll = t.orientation.rpy()[0]
    assert roll == 0.0
    est = estimate_terrain(plane_feet(25), Rotation3.identity())
    assert math.degrees(desired_base_pose(est, MODEL).orientation.rpy()[1]) == pytest.approx(25.0, abs=1e-9)
    with pytest.raises(ValueError):
        desired_base_pose(replace(est, valid=False), MODEL)


def test_swing_pd_examples():
    q = JointState(0.3, -0.2, 1.0, 2.0)
    assert np.array_equal(swing_pd(q, q, 10, 2), [0.0, 0.0])
    tau = swing_pd(JointState(0.1, 0.0), JointState(0.0, 0.0), 10.0, 3.0)
    assert tau[0] == pytest.approx(1.0) and tau[1] == 0.0
    with pytest.raises(ValueError):
        swing_pd(q, q, -1, 0)


def test_swing_pd_step_response_converges():
    dt, q, dq = 1e-3, 0.0, 0.0
    target = JointState(1.0, 1.0)
    peaks = []
    for k in range(5000):
        tau = swing_pd(target, JointState(q, q, dq, dq), 50.0, 5.0)[0]
        dq += tau * dt
        q += dq * dt
        if k % 500 == 0:
            peaks.append(abs(q - 1.0))
    assert abs(q - 1.0) < 1e-4 and abs(dq) < 1e-3
    assert peaks[-1] < peaks[1]


# -- virtual wrench ----------------------------------------------------------------


def zero_error_setup(pitch):
    est = estimate_terrain(plane_feet(pitch), Rotation3.identity())
    target = desired_base_pose(est, MODEL)
    est = replace(est, origin=-est.C_BF.rotate(target.position))
    state = BaseState(np.zeros(3), np.zeros(3), target.orientation, np.zeros(3))
    return state, target, est


def test_virtual_wrench_flat_gravity():
    state, target, est = zero_error_setup(0.0)
    w = virtual_wrench(state, target, est, MODEL)
    assert np.allclose(w.b, [0, 0, 215.82, 0, 0, 0], atol=1e-9)


def test_virtual_wrench_on_slope():
    state, target, est = zero_error_setup(25.0)
    w = virtual_wrench(state, target, est, MODEL)
    ref = -MODEL.mass * MODEL.gravity * math.sin(math.radians(25.0))
    assert w.force_footprint[0] == pytest.approx(ref, abs=1e-9)
    assert ref == pytest.approx(-91.2, abs=0.05)
    assert np.allclose(w.torque_footprint, 0.0, atol=1e-12)
    assert w.force_base[1] == 0.0


def test_virtual_torque_damping_only():
    state, target, est = zero_error_setup(0.0)
    state = replace(state, omega=np.array([0.1, 0.0, 0.0]))
    w = virtual_wrench(state, target, est, MODEL)
    assert np.allclose(w.torque_footprint, [-8.0, 0, 0], atol=1e-9)


# -- force distribution ------------------------------------------------------------


def two_leg_case(mu=0.8, f_min=5.0):
    model = replace(MODEL, mu=mu, f_min_normal=f_min)
    feet = {"LF": np.array([0.2, 0.0, -0.38]), "LH": np.array([-0.2, 0.0, -0.38])}
    return model, feet, leg_jacobians(feet, model)


def test_symmetric_two_leg_support():
    model, feet, jac = two_leg_case()
    sol = distribute_forces([0, 0, 215.82, 0, 0, 0], feet, model, jac)
    for leg in feet:
        assert np.allclose(sol.lambdas[leg], [0.0, 107.91], atol=1e-6)
    assert sol.residual == pytest.approx(0.0, abs=1e-6)
    taus = stance_torques(sol, jac)
    assert sorted(np.abs(taus["LF"])) == pytest.approx(sorted(np.abs(taus["LH"])), abs=1e-9)


def qp_objective_vs_grid(model, feet, jac, b):
    sol = distribute_forces(b, feet, model, jac)
    t, n = contact_basis(None)
    A = _wrench_matrix(feet, tuple(feet), t, n)
    bb = np.array(b, float)
    bb[5] = 0.0
    B = np.column_stack([[t[0], t[2]], [n[0], n[2]]])
    Gs, hs = zip(*[_leg_constraints(jac[leg], B, model)[:2] for leg in feet])
    nmax = 400.0
    boxes = [((-model.mu * nmax, model.f_min_normal), (model.mu * nmax, nmax))] * 2
    grid = qp_grid_min(A, bb, Gs, hs, boxes, n=50)
    x = np.concatenate([sol.lambdas[leg] for leg in feet])
    return sol, float(np.sum((A @ x - bb) ** 2)), grid


def test_cone_binding_case():
    model, feet, jac = two_leg_case()
    b = [250.0, 0, 215.82, 0, 0, 0]
    sol, obj, grid = qp_objective_vs_grid(model, feet, jac, b)
    binding = [abs(abs(lam[0]) - model.mu * lam[1]) < 1e-6 for lam in sol.lambdas.values()]
    assert any(binding)
    assert sol.residual > 1.0
    assert obj <= grid * 1.01 + 1e-6
    assert all(v == 0 for v in check_constraints(sol, jac, model).values())


def test_zero_wrench_min_normals():
    model, feet, jac = two_leg_case(f_min=10.0)
    sol = distribute_forces(np.zeros(6), feet, model, jac)
    for lam in sol.lambdas.values():
        assert lam[1] == pytest.approx(10.0, abs=1e-6)
        assert lam[0] == pytest.approx(0.0, abs=1e-6)


def test_yaw_row_is_ignored():
    feet = dict(zip(NAMES, plane_feet(0)))
    jac = leg_jacobians(feet)
    a = distribute_forces([10, 0, 215.82, 1, 2, 0], feet, MODEL, jac)
    b = distribute_forces([10, 0, 215.82, 1, 2, 40], feet, MODEL, jac)
    for leg in feet:
        assert np.array_equal(a.lambdas[leg], b.lambdas[leg])


def test_gravity_compensation_flat():
    state, target, est = zero_error_setup(0.0)
    feet = dict(zip(NAMES, plane_feet(0)))
    sol = distribute_forces(virtual_wrench(state, target, est, MODEL).b, feet, MODEL, leg_jacobians(feet), est)
    assert np.allclose(sol.achieved_wrench[:3], [0, 0, 215.82], atol=1e-6 + sol.residual)


def test_infeasible_torque_limit():
    model = replace(MODEL, tau_max=0.01, f_min_normal=50.0)
    feet = dict(zip(NAMES, plane_feet(0)))
    with pytest.raises(InfeasibleContactError) as exc:
        distribute_forces([0, 0, 215.82, 0, 0, 0], feet, model, leg_jacobians(feet))
    assert exc.value.constraint == "torque_limit"


def test_invalid_inputs():
    feet = dict(zip(NAMES, plane_feet(0)))
    with pytest.raises(ValueError):
        distribute_forces([0, 0, np.nan, 0, 0, 0], feet, MODEL, leg_jacobians(feet))
    with pytest.raises(ValueError):
        distribute_forces(np.zeros(6), {}, MODEL, {})


def test_random_wrenches_satisfy_constraints():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        pitch = rng.uniform(-20, 20)
        k = rng.integers(2, 5)
        legs = tuple(rng.choice(NAMES, size=k, replace=False))
        pts = plane_feet(pitch, h=0.40) + np.column_stack([rng.uniform(-0.05, 0.05, 4), np.zeros(4), np.zeros(4)])
        feet = {leg: pts[NAMES.index(leg)] for leg in legs}
        est = estimate_terrain(pts, Rotation3.identity())
        b = np.array([0, 0, 215.82, 0, 0, 0]) + rng.normal(0, [60, 0, 60, 15, 15, 5])
        jac = leg_jacobians(feet)
        sol = distribute_forces(b, feet, MODEL, jac, est)
        assert all(v == 0 for v in check_constraints(sol, jac, MODEL).values())


# -- turning and torques ------------------------------------------------------------


def test_turning_offset():
    feet = dict(zip(NAMES, plane_feet(0)))
    sol = distribute_forces([0, 0, 215.82, 0, 0, 0], feet, MODEL, leg_jacobians(feet))
    assert apply_turning_offset(sol, 0.0, MODEL) is sol
    turned = apply_turning_offset(sol, 0.5, MODEL)
    for leg in NAMES:
        d = turned.lambdas[leg] - sol.lambdas[leg]
        expected = 10.0 if leg.startswith("R") else -10.0
        assert d[0] == pytest.approx(expected) and d[1] == 0.0
    assert sum(turned.lambdas[leg][0] - sol.lambdas[leg][0] for leg in NAMES) == pytest.approx(0.0)


def test_stance_torques_virtual_work():
    rng = np.random.default_rng(5)
    feet = dict(zip(NAMES, plane_feet(10)))
    jac = leg_jacobians(feet)
    sol = distribute_forces([20, 0, 215.82, 0, 3, 0], feet, MODEL, jac)
    taus = stance_torques(sol, jac)
    for leg in NAMES:
        dq = rng.normal(size=2)
        f = sol.force_xz(leg)
        # the leg pushes on the ground with -lambda
        assert float(taus[leg] @ dq) == pytest.approx(-float(f @ (jac[leg] @ dq)), abs=1e-9)
    zero = replace(sol, lambdas={leg: np.zeros(2) for leg in NAMES})
    assert all(np.array_equal(t, [0.0, 0.0]) for t in stance_torques(zero, jac).values())


def test_robot_model_validation():
    with pytest.raises(ValueError):
        RobotModel(mass=0)
    with pytest.raises(ValueError):
        RobotModel(mu=-0.1)
    assert MODEL.weight == pytest.approx(215.82)
