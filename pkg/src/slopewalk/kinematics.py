"""Planar kinematics of the coaxial 2-DOF parallel leg.

Linkage convention: both motors sit on the hip axis. Each drives a proximal
link of length ``link_b``; two distal members of length ``link_a + link_c``
(shank plus coupler, treated as one rigid bar) close at the ankle pin. The
contact point lies ``foot_offset_d`` beyond the ankle along the bisector of
the two distal members.

Angles are measured from the downward vertical of the hip frame, positive
toward +x (forward). With mean angle ``psi = (q1 + q2) / 2`` and half
spread ``delta = (q1 - q2) / 2`` the foot is at ``rho(delta) * u(psi)`` with
``u(psi) = (sin psi, -cos psi)``. ``q1 >= q2`` is the assembly branch:
front proximal link ahead, rear knee pointing backward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class WorkspaceError(ValueError):
    pass


@dataclass(frozen=True)
class LegGeometry:
    link_a: float = 0.250
    link_b: float = 0.120
    link_c: float = 0.130
    foot_offset_d: float = 0.020
    side: str = "left"
    attachment: tuple[float, float, float] = (0.0, 0.0, 0.0)
    psi_limit: float = math.radians(80.0)

    def __post_init__(self):
        if min(self.link_a, self.link_b, self.link_c, self.foot_offset_d) <= 0:
            raise ValueError("link lengths must be positive")
        if self.side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        if self.distal <= self.link_b:
            raise ValueError("distal member must be longer than the proximal link")

    @property
    def distal(self) -> float:
        return self.link_a + self.link_c

    @property
    def reach_max(self) -> float:
        return self.link_b + self.distal + self.foot_offset_d

    @property
    def reach_min(self) -> float:
        return self.distal - self.link_b + self.foot_offset_d


@dataclass(frozen=True)
class JointState:
    q1: float
    q2: float
    dq1: float = 0.0
    dq2: float = 0.0

    @property
    def q(self) -> np.ndarray:
        return np.array([self.q1, self.q2])

    @property
    def dq(self) -> np.ndarray:
        return np.array([self.dq1, self.dq2])


def _rho(geom: LegGeometry, delta: float) -> float:
    b, l = geom.link_b, geom.distal
    s = math.sin(delta)
    return b * math.cos(delta) + math.sqrt(l * l - b * b * s * s) + geom.foot_offset_d


def _drho(geom: LegGeometry, delta: float) -> float:
    b, l = geom.link_b, geom.distal
    s, c = math.sin(delta), math.cos(delta)
    return -b * s - b * b * s * c / math.sqrt(l * l - b * b * s * s)


def _split(q: JointState) -> tuple[float, float]:
    psi = 0.5 * (q.q1 + q.q2)
    delta = 0.5 * (q.q1 - q.q2)
    if delta < 0.0 or delta > math.pi:
        raise WorkspaceError(f"linkage cannot close: q1 - q2 = {q.q1 - q.q2:.6g} rad outside [0, 2 pi]")
    return psi, delta


def forward_kinematics(geom: LegGeometry, q: JointState) -> np.ndarray:
    """Foot contact point (x, z) in the hip frame."""
    psi, delta = _split(q)
    r = _rho(geom, delta)
    return np.array([r * math.sin(psi), -r * math.cos(psi)])


def inverse_kinematics(geom: LegGeometry, foot) -> JointState:
    x, z = float(foot[0]), float(foot[1])
    rho = math.hypot(x, z)
    tol = 1e-12
    if rho > geom.reach_max + tol or rho < geom.reach_min - tol:
        raise WorkspaceError(
            f"foot distance {rho:.6g} m outside workspace [{geom.reach_min:.6g}, {geom.reach_max:.6g}]"
        )
    psi = math.atan2(x, -z)
    r = rho - geom.foot_offset_d
    b, l = geom.link_b, geom.distal
    # triangle hip / proximal tip / ankle
    c = (b * b + r * r - l * l) / (2.0 * b * r)
    delta = math.acos(max(-1.0, min(1.0, c)))
    return JointState(psi + delta, psi - delta)


def jacobian(geom: LegGeometry, q: JointState) -> np.ndarray:
    """d(foot x, z) / d(q1, q2)."""
    psi, delta = _split(q)
    r = _rho(geom, delta)
    dr = _drho(geom, delta)
    u = np.array([math.sin(psi), -math.cos(psi)])
    du = np.array([math.cos(psi), math.sin(psi)])
    col1 = 0.5 * dr * u + 0.5 * r * du
    col2 = -0.5 * dr * u + 0.5 * r * du
    return np.column_stack([col1, col2])


def foot_velocity(geom: LegGeometry, q: JointState) -> np.ndarray:
    return jacobian(geom, q) @ q.dq


def in_workspace(geom: LegGeometry, foot, margin: float = 0.0) -> bool:
    rho = math.hypot(float(foot[0]), float(foot[1]))
    return geom.reach_min + margin <= rho <= geom.reach_max - margin


def max_step_length(geom: LegGeometry, hip_height: float, margin: float = 0.01) -> float:
    """Longest fore-aft foot excursion at ``hip_height`` that stays inside the workspace."""
    r = geom.reach_max - margin
    if hip_height >= r:
        return 0.0
    half = math.sqrt(r * r - hip_height * hip_height)
    half = min(half, hip_height * math.tan(geom.psi_limit))
    return 2.0 * half


@dataclass(frozen=True)
class LegLayout:
    """Hip attachment points of the four legs in the base frame."""

    half_length: float = 0.25
    half_width: float = 0.15
    geometry: LegGeometry = field(default_factory=LegGeometry)

    def legs(self) -> dict[str, LegGeometry]:
        g = self.geometry
        out = {}
        for name, sx, sy in (("LF", 1, 1), ("RF", 1, -1), ("LH", -1, 1), ("RH", -1, -1)):
            out[name] = LegGeometry(
                g.link_a,
                g.link_b,
                g.link_c,
                g.foot_offset_d,
                "left" if sy > 0 else "right",
                (sx * self.half_length, sy * self.half_width, 0.0),
                g.psi_limit,
            )
        return out
