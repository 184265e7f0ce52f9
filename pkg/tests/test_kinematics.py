import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewalk.kinematics import (
    JointState,
    LegGeometry,
    LegLayout,
    WorkspaceError,
    forward_kinematics,
    in_workspace,
    inverse_kinematics,
    jacobian,
    max_step_length,
)

from oracles import fd_jacobian

GEOM = LegGeometry()


def random_q(rng, n):
    psi = rng.uniform(-1.2, 1.2, n)
    delta = rng.uniform(0.02, math.pi - 0.02, n)
    return [JointState(p + d, p - d) for p, d in zip(psi, delta)]


def test_geometry_defaults_and_workspace():
    assert (GEOM.link_a, GEOM.link_b, GEOM.link_c, GEOM.foot_offset_d) == (0.25, 0.12, 0.13, 0.02)
    for h in np.linspace(0.32, 0.50, 19):
        assert in_workspace(GEOM, (0.0, -h))
    with pytest.raises(ValueError):
        LegGeometry(link_a=-0.1)
    with pytest.raises(ValueError):
        LegGeometry(side="middle")


def test_symmetric_configuration_is_below_hip():
    for d in np.linspace(0.05, 3.0, 20):
        p = forward_kinematics(GEOM, JointState(d, -d))
        assert p[0] == pytest.approx(0.0, abs=1e-15)
        assert p[1] < 0


def test_ik_symmetric_solution():
    q = inverse_kinematics(GEOM, (0.0, -0.38))
    assert q.q1 == pytest.approx(-q.q2, abs=1e-12)
    assert q.q1 > 0


def test_fk_ik_round_trip_joint_space():
    rng = np.random.default_rng(0)
    for q in random_q(rng, 1000):
        q2 = inverse_kinematics(GEOM, forward_kinematics(GEOM, q))
        assert q2.q1 == pytest.approx(q.q1, abs=1e-9)
        assert q2.q2 == pytest.approx(q.q2, abs=1e-9)


def test_ik_fk_round_trip_task_space():
    rng = np.random.default_rng(1)
    r = rng.uniform(GEOM.reach_min, GEOM.reach_max, 1000)
    a = rng.uniform(-1.2, 1.2, 1000)
    for ri, ai in zip(r, a):
        p = np.array([ri * math.sin(ai), -ri * math.cos(ai)])
        assert np.allclose(forward_kinematics(GEOM, inverse_kinematics(GEOM, p)), p, atol=1e-9, rtol=0)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(2)

    def fk(q):
        return forward_kinematics(GEOM, JointState(q[0], q[1]))

    for q in random_q(rng, 1000):
        assert np.linalg.norm(jacobian(GEOM, q) - fd_jacobian(fk, q.q, h=1e-7)) < 1e-6


def test_boundary_extension_and_singularity():
    p = forward_kinematics(GEOM, JointState(0.3, 0.3))
    assert np.linalg.norm(p) == pytest.approx(GEOM.reach_max, abs=1e-12)
    q = inverse_kinematics(GEOM, (0.0, -GEOM.reach_max))
    assert q.q1 == pytest.approx(0.0, abs=1e-6) and q.q2 == pytest.approx(0.0, abs=1e-6)
    dets = [abs(np.linalg.det(jacobian(GEOM, JointState(d, -d)))) for d in (0.4, 0.1, 0.01, 0.001, 0.0)]
    assert all(a > b for a, b in itertools.pairwise(dets))
    assert dets[-1] == pytest.approx(0.0, abs=1e-15)


def test_symmetric_jacobian_vertical_velocity():
    q = JointState(0.7, -0.7, 1.0, -1.0)
    v = jacobian(GEOM, q) @ q.dq
    assert v[0] == pytest.approx(0.0, abs=1e-15)
    assert abs(v[1]) > 0


def test_workspace_errors():
    with pytest.raises(WorkspaceError):
        inverse_kinematics(GEOM, (0.0, -0.6))
    with pytest.raises(WorkspaceError):
        inverse_kinematics(GEOM, (0.0, -0.1))
    with pytest.raises(WorkspaceError):
        forward_kinematics(GEOM, JointState(-0.5, 0.5))


@given(
    st.floats(-1.2, 1.2),
    st.floats(0.05, 3.0),
    st.floats(-5, 5),
    st.floats(-5, 5),
    st.floats(-200, 200),
    st.floats(-200, 200),
)
def test_virtual_work_consistency(psi, delta, dq1, dq2, fx, fz):
    q = JointState(psi + delta, psi - delta, dq1, dq2)
    J = jacobian(GEOM, q)
    f = np.array([fx, fz])
    tau = J.T @ f
    assert float(tau @ q.dq) == pytest.approx(float(f @ (J @ q.dq)), abs=1e-9)


def test_max_step_length_and_layout():
    s = max_step_length(GEOM, 0.38)
    assert 0 < s < 2 * GEOM.reach_max
    assert in_workspace(GEOM, (s / 2, -0.38), margin=0.0)
    assert max_step_length(GEOM, 0.6) == 0.0
    legs = LegLayout().legs()
    assert set(legs) == {"LF", "RF", "LH", "RH"}
    assert legs["RH"].side == "right" and legs["RH"].attachment == (-0.25, -0.15, 0.0)
