import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from slopewalk.gait import (
    LEGS,
    GaitSchedule,
    contact_state,
    smoothstep,
    step_length_for,
    swing_trajectory,
)

STATIC = GaitSchedule.static_walk()
TROT = GaitSchedule.trot()


def test_default_parameters():
    assert (STATIC.cycle_time, STATIC.duty_factor, STATIC.foot_apogee) == (2.5, 0.86, 0.15)
    assert (TROT.cycle_time, TROT.duty_factor, TROT.foot_apogee) == (0.7, 0.70, 0.10)
    assert sorted(STATIC.phase_offsets.values()) == [0.0, 0.25, 0.5, 0.75]
    assert GaitSchedule.by_name("trot") == TROT
    with pytest.raises(ValueError):
        GaitSchedule.by_name("gallop")


def test_schedule_validation():
    with pytest.raises(ValueError):
        GaitSchedule("x", 0.0, 0.5, dict.fromkeys(LEGS, 0.0))
    with pytest.raises(ValueError):
        GaitSchedule("x", 1.0, 1.5, dict.fromkeys(LEGS, 0.0))
    with pytest.raises(ValueError):
        GaitSchedule("x", 1.0, 0.5, {"LF": 0.0})
    with pytest.raises(ValueError):
        GaitSchedule("x", 1.0, 0.5, dict.fromkeys(LEGS, 1.0))
    with pytest.raises(ValueError):
        contact_state(STATIC, -0.1)


def test_static_walk_at_t0():
    c = contact_state(STATIC, 0.0)
    # the leg whose offset puts it at phase 0.75 is still stancing; none has reached 0.86
    assert c.n_stance == 4
    # the leg at offset 0.75 lifts off once its phase passes 0.86
    lh = contact_state(STATIC, (0.87 - 0.75) * STATIC.cycle_time)
    assert not lh.stance["LH"] and lh.n_stance == 3


def test_static_walk_sweep_three_or_four():
    n = round(10 * STATIC.cycle_time / 1e-3)
    counts = {contact_state(STATIC, k * 1e-3).n_stance for k in range(n)}
    assert counts <= {3, 4} and 3 in counts


def test_trot_pairs_synchronized_and_periodic():
    t = np.arange(0, 5 * TROT.cycle_time, 1e-3)
    half = TROT.cycle_time / 2
    for ti in t:
        c = contact_state(TROT, ti)
        assert c.stance["LF"] == c.stance["RH"]
        assert c.stance["RF"] == c.stance["LH"]
        assert contact_state(TROT, ti + half).n_stance == c.n_stance
    c0 = contact_state(TROT, 0.0)
    assert c0.stance["LF"] and c0.stance["RH"]


@given(st.floats(0, 100), st.sampled_from(["static_walk", "trot"]))
def test_periodicity(t, name):
    s = GaitSchedule.by_name(name)
    a, b = contact_state(s, t), contact_state(s, t + s.cycle_time)
    assert a.stance == b.stance
    for leg in LEGS:
        assert a.phase[leg] == pytest.approx(b.phase[leg], abs=1e-6)
        assert 0.0 <= a.phase[leg] <= 1.0


def test_swing_boundaries_and_apex():
    start = np.array([-0.1, -0.38])
    assert np.array_equal(swing_trajectory(STATIC, 0.0, start, 0.2), start)
    assert np.array_equal(swing_trajectory(STATIC, 1.0, start, 0.2), start + [0.2, 0.0])
    assert swing_trajectory(STATIC, 0.5, start, 0.2)[1] - start[1] == pytest.approx(0.15, abs=1e-15)
    with pytest.raises(ValueError):
        swing_trajectory(STATIC, 1.1, start, 0.2)


def test_swing_dense_max_height_and_c1():
    start = np.array([0.0, 0.0])
    s = np.linspace(0, 1, 100001)
    pts = np.array([swing_trajectory(TROT, si, start, 0.21) for si in s])
    assert pts[:, 1].max() == pytest.approx(TROT.foot_apogee, abs=1e-9)
    d = np.diff(pts, axis=0) / (s[1] - s[0])
    assert np.max(np.abs(np.diff(d, axis=0))) < 1e-3
    # horizontal progress is monotone with zero slope at both ends
    assert np.all(np.diff(pts[:, 0]) >= 0)
    assert abs(d[0, 0]) < 1e-3 and abs(d[-1, 0]) < 1e-3


@given(st.floats(0, 1))
def test_smoothstep_range(s):
    v = smoothstep(s)
    assert 0.0 <= v <= 1.0
    assert smoothstep(1 - s) == pytest.approx(1 - v, abs=1e-12)


def test_step_length():
    assert step_length_for(STATIC, 0.0) == (0.0, False)
    length, clamped = step_length_for(TROT, 0.3)
    assert length == pytest.approx(0.21, abs=1e-12) and not clamped
    assert step_length_for(TROT, 1.0, max_step=0.3) == (0.3, True)
    with pytest.raises(ValueError):
        step_length_for(TROT, -0.1)
    assert math.isclose(step_length_for(STATIC, 0.1)[0], 0.25)
