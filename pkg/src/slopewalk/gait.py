"""Time-based gait scheduling and swing-foot trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LEGS = ("LF", "RF", "LH", "RH")


@dataclass(frozen=True)
class GaitSchedule:
    name: str
    cycle_time: float
    duty_factor: float
    phase_offsets: dict = field(default_factory=dict)
    foot_apogee: float = 0.1

    def __post_init__(self):
        if not self.cycle_time > 0:
            raise ValueError("cycle_time must be positive")
        if not 0.0 < self.duty_factor <= 1.0:
            raise ValueError("duty_factor must lie in (0, 1]")
        if set(self.phase_offsets) != set(LEGS):
            raise ValueError(f"phase_offsets must name exactly {LEGS}")
        for leg, off in self.phase_offsets.items():
            if not 0.0 <= off < 1.0:
                raise ValueError(f"offset of {leg} outside [0, 1)")

    @classmethod
    def static_walk(cls, cycle_time=2.5, duty_factor=0.86, foot_apogee=0.15, order=("LF", "RH", "RF", "LH")):
        offsets = {leg: 0.25 * k for k, leg in enumerate(order)}
        return cls("static_walk", cycle_time, duty_factor, offsets, foot_apogee)

    @classmethod
    def trot(cls, cycle_time=0.7, duty_factor=0.70, foot_apogee=0.10):
        offsets = {"LF": 0.0, "RH": 0.0, "RF": 0.5, "LH": 0.5}
        return cls("trot", cycle_time, duty_factor, offsets, foot_apogee)

    @classmethod
    def by_name(cls, name: str, **overrides) -> GaitSchedule:
        if name in ("static", "static_walk"):
            return cls.static_walk(**overrides)
        if name == "trot":
            return cls.trot(**overrides)
        raise ValueError(f"unknown gait '{name}'")


@dataclass(frozen=True)
class ContactAssignment:
    stance: dict  # leg -> bool
    phase: dict  # leg -> progress through the current stance or swing, [0, 1]

    @property
    def n_stance(self) -> int:
        return sum(self.stance.values())

    def stance_legs(self) -> list[str]:
        return [leg for leg in LEGS if self.stance[leg]]


def leg_phase(schedule: GaitSchedule, leg: str, t: float) -> float:
    return (t / schedule.cycle_time + schedule.phase_offsets[leg]) % 1.0


def contact_state(schedule: GaitSchedule, t: float) -> ContactAssignment:
    if t < 0:
        raise ValueError("time must be non-negative")
    duty = schedule.duty_factor
    stance, phase = {}, {}
    for leg in LEGS:
        ph = leg_phase(schedule, leg, t)
        if ph < duty:
            stance[leg] = True
            phase[leg] = ph / duty
        else:
            stance[leg] = False
            phase[leg] = (ph - duty) / (1.0 - duty)
    return ContactAssignment(stance, phase)


def smoothstep(s):
    return s * s * (3.0 - 2.0 * s)


def swing_trajectory(schedule: GaitSchedule, swing_phase: float, start, step_length: float) -> np.ndarray:
    """Hip-frame swing target: smoothstep advance plus a half-sine lift."""
    if not 0.0 <= swing_phase <= 1.0:
        raise ValueError("swing_phase must lie in [0, 1]")
    s = swing_phase
    x = start[0] + step_length * smoothstep(s)
    z = start[1] + schedule.foot_apogee * math.sin(math.pi * s)
    if s == 1.0:
        z = start[1]
    return np.array([x, z])


def step_length_for(schedule: GaitSchedule, v_desired: float, max_step: float = math.inf) -> tuple[float, bool]:
    """Distance covered per cycle, clamped to ``max_step``. Returns (length, clamped)."""
    if v_desired < 0:
        raise ValueError("desired velocity must be non-negative")
    length = v_desired * schedule.cycle_time
    if length > max_step:
        return max_step, True
    return length, False
