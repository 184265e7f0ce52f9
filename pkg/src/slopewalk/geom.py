"""Rotations, planar poses and Dubins shortest paths."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

DUBINS_TYPES = ("LSL", "RSR", "LSR", "RSL", "RLR", "LRL")


def wrap_angle(theta: float) -> float:
    """Wrap to the half-open interval [-pi, pi)."""
    w = (theta + math.pi) % TWO_PI - math.pi
    # float modulo can round up to exactly +pi
    if w >= math.pi:
        w -= TWO_PI
    return w


def mod2pi(theta: float) -> float:
    w = theta % TWO_PI
    # a full loop is never part of a shortest path; snap rounding noise to 0
    return 0.0 if w >= TWO_PI - 1e-9 else w


# ---------------------------------------------------------------------------
# Rotations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rotation3:
    """Unit quaternion (w, x, y, z), stored with w >= 0.

    ``a * b`` (or ``compose(a, b)``) applies ``b`` first, then ``a``.
    """

    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        n = math.sqrt(self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z)
        if not n > 0.0 or not math.isfinite(n):
            raise ValueError("quaternion must have finite non-zero norm")
        s = 1.0 / n
        if self.w < 0.0:
            s = -s
        object.__setattr__(self, "w", self.w * s)
        object.__setattr__(self, "x", self.x * s)
        object.__setattr__(self, "y", self.y * s)
        object.__setattr__(self, "z", self.z * s)

    @staticmethod
    def identity() -> Rotation3:
        return Rotation3(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_rotvec(v) -> Rotation3:
        vx, vy, vz = (float(c) for c in v)
        angle = math.sqrt(vx * vx + vy * vy + vz * vz)
        if angle < 1e-12:
            # second-order accurate near zero
            return Rotation3(1.0 - angle * angle / 8.0, 0.5 * vx, 0.5 * vy, 0.5 * vz)
        s = math.sin(0.5 * angle) / angle
        return Rotation3(math.cos(0.5 * angle), vx * s, vy * s, vz * s)

    @staticmethod
    def from_axis_angle(axis, angle: float) -> Rotation3:
        a = np.asarray(axis, dtype=float)
        a = a / np.linalg.norm(a)
        return Rotation3.from_rotvec(a * angle)

    @staticmethod
    def about_x(angle: float) -> Rotation3:
        return Rotation3(math.cos(0.5 * angle), math.sin(0.5 * angle), 0.0, 0.0)

    @staticmethod
    def about_y(angle: float) -> Rotation3:
        return Rotation3(math.cos(0.5 * angle), 0.0, math.sin(0.5 * angle), 0.0)

    @staticmethod
    def about_z(angle: float) -> Rotation3:
        return Rotation3(math.cos(0.5 * angle), 0.0, 0.0, math.sin(0.5 * angle))

    @staticmethod
    def from_rpy(roll: float, pitch: float, yaw: float) -> Rotation3:
        """Z-Y-X convention: R = Rz(yaw) Ry(pitch) Rx(roll)."""
        return Rotation3.about_z(yaw) * Rotation3.about_y(pitch) * Rotation3.about_x(roll)

    @staticmethod
    def from_matrix(m) -> Rotation3:
        m = np.asarray(m, dtype=float)
        tr = m[0, 0] + m[1, 1] + m[2, 2]
        # Shepperd: pick the largest diagonal term for conditioning
        if tr > max(m[0, 0], m[1, 1], m[2, 2]):
            s = 2.0 * math.sqrt(1.0 + tr)
            return Rotation3(0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
        if m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
            s = 2.0 * math.sqrt(max(1.0 + m[0, 0] - m[1, 1] - m[2, 2], 0.0))
            return Rotation3((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
        if m[1, 1] >= m[2, 2]:
            s = 2.0 * math.sqrt(max(1.0 + m[1, 1] - m[0, 0] - m[2, 2], 0.0))
            return Rotation3((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s)
        s = 2.0 * math.sqrt(max(1.0 + m[2, 2] - m[0, 0] - m[1, 1], 0.0))
        return Rotation3((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
                [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
                [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
            ]
        )

    def inverse(self) -> Rotation3:
        return Rotation3(self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other: Rotation3) -> Rotation3:
        a, b = self, other
        return Rotation3(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )

    def rotate(self, v) -> np.ndarray:
        return self.as_matrix() @ np.asarray(v, dtype=float)

    def log(self) -> np.ndarray:
        """Rotation vector (axis * angle), angle in [0, pi]."""
        v = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if v < 1e-12:
            return np.array([2.0 * self.x, 2.0 * self.y, 2.0 * self.z])
        angle = 2.0 * math.atan2(v, self.w)
        k = angle / v
        return np.array([self.x * k, self.y * k, self.z * k])

    def rpy(self) -> tuple[float, float, float]:
        """(roll, pitch, yaw) in the Z-Y-X convention of :meth:`from_rpy`."""
        m = self.as_matrix()
        roll = math.atan2(m[2, 1], m[2, 2])
        pitch = math.atan2(-m[2, 0], math.hypot(m[2, 1], m[2, 2]))
        yaw = math.atan2(m[1, 0], m[0, 0])
        return roll, pitch, yaw

    def angle_to(self, other: Rotation3) -> float:
        """Geodesic angle between two rotations."""
        d = abs(self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z)
        return 2.0 * math.acos(min(1.0, d))


def compose(a: Rotation3, b: Rotation3) -> Rotation3:
    """Rotation that applies ``b`` then ``a``."""
    return a * b


def boxminus(p_target: Rotation3, p_current: Rotation3) -> np.ndarray:
    """Rotation vector of ``p_target * p_current^-1`` (short way)."""
    return (p_target * p_current.inverse()).log()


# ---------------------------------------------------------------------------
# SE(2) and Dubins curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Se2State:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))

    def distance(self, other: Se2State) -> float:
        return math.hypot(other.x - self.x, other.y - self.y)


def _lsl(a, b, d, sa, sb, ca, cb, cab):
    p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sa - sb)
    if p2 < 0.0:
        if p2 < -1e-10:
            return None
        p2 = 0.0
    tmp = math.atan2(cb - ca, d + sa - sb)
    return mod2pi(-a + tmp), math.sqrt(p2), mod2pi(b - tmp)


def _rsr(a, b, d, sa, sb, ca, cb, cab):
    p2 = 2.0 + d * d - 2.0 * cab + 2.0 * d * (sb - sa)
    if p2 < 0.0:
        if p2 < -1e-10:
            return None
        p2 = 0.0
    tmp = math.atan2(ca - cb, d - sa + sb)
    return mod2pi(a - tmp), math.sqrt(p2), mod2pi(-b + tmp)


def _lsr(a, b, d, sa, sb, ca, cb, cab):
    p2 = -2.0 + d * d + 2.0 * cab + 2.0 * d * (sa + sb)
    if p2 < 0.0:
        if p2 < -1e-10:
            return None
        p2 = 0.0
    p = math.sqrt(p2)
    tmp = math.atan2(-ca - cb, d + sa + sb) - math.atan2(-2.0, p)
    return mod2pi(-a + tmp), p, mod2pi(-b + tmp)


def _rsl(a, b, d, sa, sb, ca, cb, cab):
    p2 = -2.0 + d * d + 2.0 * cab - 2.0 * d * (sa + sb)
    if p2 < 0.0:
        if p2 < -1e-10:
            return None
        p2 = 0.0
    p = math.sqrt(p2)
    tmp = math.atan2(ca + cb, d - sa - sb) - math.atan2(2.0, p)
    return mod2pi(a - tmp), p, mod2pi(b - tmp)


def _rlr(a, b, d, sa, sb, ca, cb, cab):
    tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sa - sb)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = mod2pi(TWO_PI - math.acos(tmp))
    t = mod2pi(a - math.atan2(ca - cb, d - sa + sb) + p / 2.0)
    return t, p, mod2pi(a - b - t + p)


def _lrl(a, b, d, sa, sb, ca, cb, cab):
    tmp = (6.0 - d * d + 2.0 * cab + 2.0 * d * (sb - sa)) / 8.0
    if abs(tmp) > 1.0:
        return None
    p = mod2pi(TWO_PI - math.acos(tmp))
    t = mod2pi(-a - math.atan2(ca - cb, d + sa - sb) + p / 2.0)
    return t, p, mod2pi(b - a - t + p)


_WORDS = {"LSL": _lsl, "RSR": _rsr, "LSR": _lsr, "RSL": _rsl, "RLR": _rlr, "LRL": _lrl}


@dataclass(frozen=True)
class DubinsPath:
    """Three-segment forward path; ``params`` are normalized by ``radius``."""

    path_type: str
    params: tuple[float, float, float]
    radius: float
    start: Se2State

    @property
    def segment_lengths(self) -> tuple[float, float, float]:
        r = self.radius
        return (self.params[0] * r, self.params[1] * r, self.params[2] * r)

    @property
    def length(self) -> float:
        return (self.params[0] + self.params[1] + self.params[2]) * self.radius

    @property
    def goal(self) -> Se2State:
        return dubins_sample(self, self.length)

    def sample_many(self, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized :func:`dubins_sample` (no range check, theta unwrapped)."""
        s = np.asarray(s, dtype=float) / self.radius
        x = np.zeros_like(s)
        y = np.zeros_like(s)
        th = np.full_like(s, self.start.theta)
        remaining = s.copy()
        for seg, length in zip(self.path_type, self.params):
            step = np.minimum(remaining, length)
            x, y, th = _advance_vec(seg, x, y, th, step)
            remaining = remaining - step
        r = self.radius
        return self.start.x + x * r, self.start.y + y * r, th


def _advance(seg: str, x: float, y: float, th: float, t: float):
    if seg == "S":
        return x + t * math.cos(th), y + t * math.sin(th), th
    if seg == "L":
        return x + math.sin(th + t) - math.sin(th), y - math.cos(th + t) + math.cos(th), th + t
    return x - math.sin(th - t) + math.sin(th), y + math.cos(th - t) - math.cos(th), th - t


def _advance_vec(seg, x, y, th, t):
    if seg == "S":
        return x + t * np.cos(th), y + t * np.sin(th), th
    if seg == "L":
        return x + np.sin(th + t) - np.sin(th), y - np.cos(th + t) + np.cos(th), th + t
    return x - np.sin(th - t) + np.sin(th), y + np.cos(th - t) - np.cos(th), th - t


def _normalized_frame(start: Se2State, goal: Se2State, radius: float):
    dx = goal.x - start.x
    dy = goal.y - start.y
    d = math.hypot(dx, dy) / radius
    th = math.atan2(dy, dx) if d > 0.0 else 0.0
    a = mod2pi(start.theta - th)
    b = mod2pi(goal.theta - th)
    return a, b, d


def dubins_candidates(start: Se2State, goal: Se2State, radius: float) -> dict[str, DubinsPath]:
    """All existing Dubins words between two poses."""
    if not radius > 0.0:
        raise ValueError("radius must be positive")
    a, b, d = _normalized_frame(start, goal, radius)
    sa, sb, ca, cb = math.sin(a), math.sin(b), math.cos(a), math.cos(b)
    cab = math.cos(a - b)
    out = {}
    for name, fn in _WORDS.items():
        res = fn(a, b, d, sa, sb, ca, cb, cab)
        if res is not None:
            out[name] = DubinsPath(name, res, float(radius), start)
    return out


def dubins_shortest(start: Se2State, goal: Se2State, radius: float) -> DubinsPath:
    cands = dubins_candidates(start, goal, radius)
    # ties resolved by the fixed word order for determinism
    best = min(cands.values(), key=lambda p: sum(p.params))
    return best


def dubins_sample(path: DubinsPath, s: float) -> Se2State:
    """Pose at arclength ``s`` (meters) along ``path``."""
    total = path.length
    if s < 0.0 or s > total + 1e-9:
        raise ValueError(f"arclength {s} outside [0, {total}]")
    remaining = min(s, total) / path.radius
    x, y, th = 0.0, 0.0, path.start.theta
    for seg, length in zip(path.path_type, path.params):
        step = min(remaining, length)
        x, y, th = _advance(seg, x, y, th, step)
        remaining -= step
        if remaining <= 0.0:
            break
    r = path.radius
    return Se2State(path.start.x + x * r, path.start.y + y * r, th)


def dubins_shortest_batch(x0, y0, t0, x1, y1, t1, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`dubins_shortest` for arrays of pose pairs.

    Returns ``(word, params)``: an index into ``DUBINS_TYPES`` and the (n, 3)
    normalized segment lengths. Ties go to the earlier word, as in the scalar
    version.
    """
    dx = np.asarray(x1, dtype=float) - x0
    dy = np.asarray(y1, dtype=float) - y0
    dx, dy, t0, t1 = np.broadcast_arrays(dx, dy, np.asarray(t0, dtype=float), np.asarray(t1, dtype=float))
    d = np.hypot(dx, dy) / radius
    th = np.where(d > 0.0, np.arctan2(dy, dx), 0.0)
    a = np.mod(t0 - th, TWO_PI)
    b = np.mod(t1 - th, TWO_PI)
    sa, sb, ca, cb = np.sin(a), np.sin(b), np.cos(a), np.cos(b)
    cab = np.cos(a - b)

    shape = d.shape
    P = np.empty((6, 3) + shape)  # raw angles, wrapped in one pass below
    ok = np.empty((6,) + shape, dtype=bool)
    with np.errstate(invalid="ignore"):
        # LSL, RSR
        base = 2.0 + d * d - 2.0 * cab
        for k, sgn in ((0, 1.0), (1, -1.0)):
            p2 = base + sgn * 2.0 * d * (sa - sb)
            tmp = np.arctan2(sgn * (cb - ca), d + sgn * (sa - sb))
            P[k, 0] = sgn * (-a + tmp)
            P[k, 1] = np.sqrt(np.maximum(p2, 0.0))
            P[k, 2] = sgn * (b - tmp)
            ok[k] = p2 >= -1e-10
        # LSR, RSL
        base = -2.0 + d * d + 2.0 * cab
        for k, sgn in ((2, 1.0), (3, -1.0)):
            p2 = base + sgn * 2.0 * d * (sa + sb)
            p = np.sqrt(np.maximum(p2, 0.0))
            tmp = np.arctan2(sgn * (-ca - cb), d + sgn * (sa + sb)) - np.arctan2(-2.0 * sgn, p)
            P[k, 0] = sgn * (-a + tmp)
            P[k, 1] = p
            P[k, 2] = -b + tmp if sgn > 0 else b - tmp
            ok[k] = p2 >= -1e-10
        # RLR, LRL
        for k, sgn in ((4, 1.0), (5, -1.0)):
            c = (6.0 - d * d + 2.0 * cab + sgn * 2.0 * d * (sa - sb)) / 8.0
            p = np.mod(TWO_PI - np.arccos(np.clip(c, -1.0, 1.0)), TWO_PI)
            t = np.mod(sgn * a - np.arctan2(ca - cb, d - sgn * (sa - sb)) + p / 2.0, TWO_PI)
            t = np.where(t >= TWO_PI - 1e-9, 0.0, t)
            P[k, 0] = t
            P[k, 1] = p
            P[k, 2] = sgn * (a - b) - t + p
            ok[k] = np.abs(c) <= 1.0
    # wrap the turning segments into [0, 2 pi); straight lengths are non-negative already
    turns = P[:, [0, 2]]
    turns = np.mod(turns, TWO_PI)
    turns[turns >= TWO_PI - 1e-9] = 0.0
    P[:, [0, 2]] = turns
    P[4:, 1] = np.where(P[4:, 1] >= TWO_PI - 1e-9, 0.0, P[4:, 1])
    totals = np.where(ok, P.sum(axis=1), np.inf)
    word = np.argmin(totals, axis=0)
    chosen = np.take_along_axis(P, word[None, None, ...], axis=0)[0]
    return word, np.moveaxis(chosen, 0, -1)


def dubins_lengths(x0, y0, t0, x1, y1, t1, radius: float) -> np.ndarray:
    """Vectorized shortest Dubins length (meters) for arrays of pose pairs."""
    _, params = dubins_shortest_batch(x0, y0, t0, x1, y1, t1, radius)
    return params.sum(axis=-1) * radius


# per word and segment: +1 left turn, -1 right turn, 0 straight
_TURN = np.array([[{"L": 1.0, "R": -1.0, "S": 0.0}[c] for c in w] for w in DUBINS_TYPES])


def sample_dubins_batch(x0, y0, t0, word, params, radius: float, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Poses at arclength ``s`` along many paths at once (theta unwrapped).

    All arguments are broadcast per sample: ``word`` indexes ``DUBINS_TYPES``
    and ``params`` has a trailing axis of 3.
    """
    remaining = np.asarray(s, dtype=float) / radius
    params = np.asarray(params, dtype=float)
    turn = _TURN[np.asarray(word)]
    x = np.zeros_like(remaining)
    y = np.zeros_like(remaining)
    th = np.asarray(t0, dtype=float) + x
    for k in range(3):
        t = np.minimum(remaining, params[..., k])
        sg = turn[..., k]
        straight = sg == 0.0
        # arcs: (sin(th + sg t) - sin th) / sg, written to stay finite when sg = 0
        th1 = th + sg * t
        s0, c0 = np.sin(th), np.cos(th)
        x = x + np.where(straight, t * c0, sg * (np.sin(th1) - s0))
        y = y + np.where(straight, t * s0, sg * (c0 - np.cos(th1)))
        th = th1
        remaining = remaining - t
    return np.asarray(x0) + x * radius, np.asarray(y0) + y * radius, th
