"""Onboard locomotion control.

Frames: world ``W`` (z up), base ``B`` (torso, x forward), footprint ``F``
(origin at the mean stance-foot position, x-y plane parallel to the
estimated terrain, x along the heading). ``C_XY`` maps coordinates in ``Y``
to coordinates in ``X``.

Contact forces ``lambda = (tangential, normal)`` are ground reactions acting
on the torso, expressed along footprint-aligned directions inside the base
x-z plane (the legs cannot push sideways).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geom import Rotation3, boxminus
from .kinematics import JointState, LegGeometry, LegLayout
from .qp import QPError, active_set_qp, polygon_vertices

YAW_ROW = 5


class InfeasibleContactError(ValueError):
    def __init__(self, constraint: str, leg: str, detail: str = ""):
        msg = f"contact-force constraints infeasible: {constraint} on leg {leg}"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.constraint = constraint
        self.leg = leg


@dataclass(frozen=True)
class RobotModel:
    mass: float = 22.0
    gravity: float = 9.81
    layout: LegLayout = field(default_factory=LegLayout)
    mu: float = 0.6
    f_min_normal: float = 5.0
    tau_max: float = 30.0
    hip_height_target: float = 0.38
    k_turn: float = 20.0

    def __post_init__(self):
        if not (self.mass > 0 and self.gravity > 0 and self.tau_max > 0):
            raise ValueError("mass, gravity and tau_max must be positive")
        if self.mu < 0 or self.f_min_normal < 0:
            raise ValueError("mu and f_min_normal must be non-negative")

    @property
    def legs(self) -> dict[str, LegGeometry]:
        return self.layout.legs()

    @property
    def weight(self) -> float:
        return self.mass * self.gravity


@dataclass(frozen=True)
class VmcGains:
    """Virtual model controller gains (hand-tuned in the simulator)."""

    kp_force: tuple[float, float, float] = (600.0, 600.0, 2000.0)
    kd_force: tuple[float, float, float] = (250.0, 250.0, 250.0)
    kp_torque: float = 1000.0
    kd_torque: float = 80.0


# -- terrain estimation -------------------------------------------------------


@dataclass(frozen=True)
class TerrainEstimate:
    normal: np.ndarray  # plane normal, base frame
    C_BF: Rotation3
    C_WF: Rotation3
    origin: np.ndarray  # footprint origin, base frame
    valid: bool = True

    @property
    def pitch(self) -> float:
        return self.C_WF.rpy()[1]


def _footprint_rotation(normal: np.ndarray) -> Rotation3:
    x = np.array([1.0, 0.0, 0.0]) - normal[0] * normal
    x /= np.linalg.norm(x)
    y = np.cross(normal, x)
    return Rotation3.from_matrix(np.column_stack([x, y, normal]))


def estimate_terrain(foot_positions, imu_orientation: Rotation3, cond_limit: float = 1e8) -> TerrainEstimate:
    """Least-squares plane through contact points given in the base frame.

    Fewer than three points or (near-)collinear points give ``valid=False``;
    the caller keeps its previous estimate in that case.
    """
    pts = np.asarray(foot_positions, dtype=float).reshape(-1, 3)
    origin = pts.mean(axis=0) if len(pts) else np.zeros(3)
    invalid = TerrainEstimate(np.array([0.0, 0.0, 1.0]), Rotation3.identity(), imu_orientation, origin, False)
    if len(pts) < 3:
        return invalid
    M = np.column_stack([pts[:, 0], pts[:, 1], np.ones(len(pts))])
    if np.linalg.cond(M) > cond_limit:
        return invalid
    (a, b, _), *_ = np.linalg.lstsq(M, pts[:, 2], rcond=None)
    n = np.array([-a, -b, 1.0])
    n /= np.linalg.norm(n)
    C_BF = _footprint_rotation(n)
    return TerrainEstimate(n, C_BF, imu_orientation * C_BF, origin, True)


# -- base pose target ---------------------------------------------------------


@dataclass(frozen=True)
class BasePoseTarget:
    orientation: Rotation3  # desired C_WB
    position: np.ndarray  # desired base position in the footprint frame
    velocity_x: float = 0.0  # desired heading speed, footprint x


def desired_base_pose(estimate: TerrainEstimate, model: RobotModel, velocity_x: float = 0.0) -> BasePoseTarget:
    """Pitch follows the footprint, roll stays level.

    The base origin is placed ``hip_height_target`` above the plane such that
    its vertical (gravity-direction) projection lands on the footprint origin.
    On a slope this shifts the base uphill, keeping the center of mass over
    the support polygon instead of behind it.
    """
    if not estimate.valid:
        raise ValueError("terrain estimate is not valid")
    _, pitch, yaw = estimate.C_WF.rpy()
    up_F = estimate.C_WF.inverse().rotate([0.0, 0.0, 1.0])
    position = model.hip_height_target * up_F / up_F[2]
    return BasePoseTarget(Rotation3.from_rpy(0.0, pitch, yaw), position, velocity_x)


def swing_pd(q_des: JointState, q_meas: JointState, kp: float, kd: float) -> np.ndarray:
    if kp < 0 or kd < 0:
        raise ValueError("gains must be non-negative")
    return kp * (q_des.q - q_meas.q) + kd * (q_des.dq - q_meas.dq)


# -- virtual model control ------------------------------------------------------


@dataclass(frozen=True)
class BaseState:
    position: np.ndarray  # world
    velocity: np.ndarray  # world
    orientation: Rotation3  # C_WB
    omega: np.ndarray  # world


@dataclass(frozen=True)
class VirtualWrench:
    force_footprint: np.ndarray
    force_base: np.ndarray  # after projection onto the base x-z plane
    torque_footprint: np.ndarray
    torque_base: np.ndarray

    @property
    def b(self) -> np.ndarray:
        return np.concatenate([self.force_base, self.torque_base])


def virtual_wrench(
    state: BaseState,
    target: BasePoseTarget,
    estimate: TerrainEstimate,
    model: RobotModel,
    gains: VmcGains | None = None,
) -> VirtualWrench:
    gains = gains or VmcGains()
    C_WB = state.orientation
    C_FW = estimate.C_WF.inverse()
    C_BF = estimate.C_BF
    # base position relative to the footprint origin, footprint frame
    r_FB = C_BF.inverse().rotate(-estimate.origin)
    v_F = C_FW.rotate(state.velocity)
    e = target.position - r_FB
    kp, kd = gains.kp_force, gains.kd_force
    F = np.array(
        [
            kp[0] * e[0] + kd[0] * (target.velocity_x - v_F[0]),
            kp[1] * e[1] - kd[1] * v_F[1],
            kp[2] * e[2] - kd[2] * v_F[2],
        ]
    )
    F = F + C_FW.rotate([0.0, 0.0, model.mass * model.gravity])

    p_FB = C_FW * C_WB
    p_FB_des = C_FW * target.orientation
    omega_F = C_FW.rotate(state.omega)
    T = gains.kp_torque * boxminus(p_FB_des, p_FB) - gains.kd_torque * omega_F

    F_B = C_BF.rotate(F)
    F_B[1] = 0.0
    return VirtualWrench(F, F_B, T, C_BF.rotate(T))


# -- contact force distribution ---------------------------------------------------


@dataclass(frozen=True)
class ContactForceSolution:
    legs: tuple[str, ...]
    lambdas: dict  # leg -> np.array([tangential, normal])
    tangent: np.ndarray  # base frame
    normal: np.ndarray  # base frame
    achieved_wrench: np.ndarray
    residual: float

    def force_base(self, leg: str) -> np.ndarray:
        t, n = self.lambdas[leg]
        return t * self.tangent + n * self.normal

    def force_xz(self, leg: str) -> np.ndarray:
        f = self.force_base(leg)
        return np.array([f[0], f[2]])


def contact_basis(estimate: TerrainEstimate | None) -> tuple[np.ndarray, np.ndarray]:
    """Footprint tangent/normal directions restricted to the base x-z plane."""
    if estimate is None:
        return np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0])
    xf = estimate.C_BF.rotate([1.0, 0.0, 0.0])
    t = np.array([xf[0], 0.0, xf[2]])
    t /= np.linalg.norm(t)
    return t, np.array([-t[2], 0.0, t[0]])


def _leg_constraints(J: np.ndarray, B: np.ndarray, model: RobotModel):
    """Rows of ``G lambda <= h`` for one leg, with family labels."""
    T = -J.T @ B  # joint torques per unit (tangential, normal)
    mu = model.mu
    G = np.array(
        [
            [0.0, -1.0],
            [1.0, -mu],
            [-1.0, -mu],
            T[0],
            -T[0],
            T[1],
            -T[1],
        ]
    )
    h = np.array([-model.f_min_normal, 0.0, 0.0] + [model.tau_max] * 4)
    labels = ["min_normal", "friction_cone", "friction_cone"] + ["torque_limit"] * 4
    return G, h, labels


def _wrench_matrix(feet: dict, legs, t: np.ndarray, n: np.ndarray) -> np.ndarray:
    A = np.zeros((6, 2 * len(legs)))
    for k, leg in enumerate(legs):
        r = np.asarray(feet[leg], dtype=float)
        A[:3, 2 * k] = t
        A[:3, 2 * k + 1] = n
        A[3:, 2 * k] = np.cross(r, t)
        A[3:, 2 * k + 1] = np.cross(r, n)
    return A


def distribute_forces(
    wrench,
    feet: dict,
    model: RobotModel,
    jacobians: dict,
    estimate: TerrainEstimate | None = None,
    regularization: float = 1e-8,
) -> ContactForceSolution:
    """Constrained least-squares mapping of the virtual wrench to stance-foot forces.

    ``feet`` maps leg name to the foot position relative to the base (COM),
    base frame. The yaw-moment request is zeroed: the solver asks for no
    yaw moment instead of tracking yaw.
    """
    legs = tuple(feet)
    if not 1 <= len(legs) <= 4:
        raise ValueError("need 1 to 4 stance legs")
    b = np.array(wrench, dtype=float)
    if b.shape != (6,) or not np.all(np.isfinite(b)):
        raise ValueError("wrench must be a finite 6-vector")
    b[YAW_ROW] = 0.0
    t, n = contact_basis(estimate)
    B = np.column_stack([[t[0], t[2]], [n[0], n[2]]])

    A = _wrench_matrix(feet, legs, t, n)
    bb = b

    nv = 2 * len(legs)
    G = np.zeros((7 * len(legs), nv))
    h = np.zeros(7 * len(legs))
    labels = []
    x0 = np.zeros(nv)
    for k, leg in enumerate(legs):
        Gk, hk, lk = _leg_constraints(np.asarray(jacobians[leg], float), B, model)
        G[7 * k : 7 * k + 7, 2 * k : 2 * k + 2] = Gk
        h[7 * k : 7 * k + 7] = hk
        labels += lk
        start = np.array([0.0, model.f_min_normal])
        if np.all(Gk @ start <= hk + 1e-9):
            x0[2 * k : 2 * k + 2] = start
            continue
        verts = polygon_vertices(Gk, hk)
        if len(verts) == 0:
            # normal bound + cone are always jointly feasible, so torque limits bind
            raise InfeasibleContactError(
                "torque_limit", leg, f"tau_max={model.tau_max} N m cannot sustain f_min_normal={model.f_min_normal} N"
            )
        x0[2 * k : 2 * k + 2] = verts[np.argmin(np.linalg.norm(verts, axis=1))]

    AtA = A.T @ A
    H = 2.0 * (AtA + regularization * np.eye(nv))
    g = -2.0 * A.T @ bb
    try:
        x, W = active_set_qp(H, g, G, h, x0)
    except QPError as exc:  # pragma: no cover - defensive
        raise RuntimeError(f"contact-force QP failed: {exc}") from exc
    x = _polish(A, bb, G, h, W, x)

    lambdas = {leg: x[2 * k : 2 * k + 2].copy() for k, leg in enumerate(legs)}
    achieved = A @ x
    residual = float(np.linalg.norm(A @ x - bb))
    return ContactForceSolution(legs, lambdas, t, n, achieved, residual)


def _polish(A, b, G, h, W, x):
    """Remove the regularization bias: exact min-norm least squares on the final working set."""
    if W:
        Gw = G[W]
        hw = h[W]
        xp = np.linalg.lstsq(Gw, hw, rcond=None)[0]
        _, s, vt = np.linalg.svd(Gw)
        rank = int(np.sum(s > 1e-10 * s.max()))
        N = vt[rank:].T
    else:
        xp = np.zeros(A.shape[1])
        N = np.eye(A.shape[1])
    if N.shape[1] == 0:
        cand = xp
    else:
        z = np.linalg.lstsq(A @ N, b - A @ xp, rcond=1e-12)[0]
        cand = xp + N @ z
    feasible = np.all(G @ cand - h <= 1e-9 * (1.0 + np.abs(h)))
    if feasible and np.linalg.norm(A @ cand - b) <= np.linalg.norm(A @ x - b) + 1e-9:
        return cand
    return x


def apply_turning_offset(
    solution: ContactForceSolution, yaw_rate_des: float, model: RobotModel
) -> ContactForceSolution:
    """Anti-parallel tangential offsets: +k_turn * rate on right legs, - on left legs."""
    if yaw_rate_des == 0.0:
        return solution
    legs = model.legs
    out = {}
    for leg, lam in solution.lambdas.items():
        i = 0 if legs[leg].side == "right" else 1
        out[leg] = lam + (-1.0) ** i * model.k_turn * np.array([yaw_rate_des, 0.0])
    return replace(solution, lambdas=out)


def stance_torques(solution: ContactForceSolution, jacobians: dict) -> dict:
    """Joint torques realizing the stance forces.

    The leg pushes on the ground with the negated reaction, so
    ``tau = J^T (-lambda)`` in hip-frame x-z components.
    """
    return {leg: -np.asarray(jacobians[leg]).T @ solution.force_xz(leg) for leg in solution.legs}


def check_constraints(solution: ContactForceSolution, jacobians: dict, model: RobotModel, tol: float = 1e-6) -> dict:
    """Count constraint violations per family for a (pre-turning) solution."""
    counts = {"min_normal": 0, "friction_cone": 0, "torque_limit": 0}
    taus = stance_torques(solution, jacobians)
    for leg in solution.legs:
        t, n = solution.lambdas[leg]
        if n < model.f_min_normal - tol:
            counts["min_normal"] += 1
        if abs(t) > model.mu * n + tol:
            counts["friction_cone"] += 1
        if np.any(np.abs(taus[leg]) > model.tau_max + tol):
            counts["torque_limit"] += 1
    return counts


# -- pipeline ----------------------------------------------------------------


@dataclass
class ControlOutput:
    estimate: TerrainEstimate
    target: BasePoseTarget
    wrench: VirtualWrench
    solution: ContactForceSolution
    turned: ContactForceSolution
    torques: dict


class Controller:
    """Per-tick stance pipeline; keeps the last valid terrain estimate."""

    def __init__(self, model: RobotModel, gains: VmcGains | None = None):
        self.model = model
        self.gains = gains or VmcGains()
        self.estimate: TerrainEstimate | None = None

    def update_estimate(self, stance_feet: dict, orientation: Rotation3, support_legs=None) -> TerrainEstimate:
        """Fit the plane to all stance feet; place the origin at the mean of ``support_legs``.

        ``support_legs`` defaults to every stance leg. Passing the legs that
        will carry the robot through the next swing shifts the base over the
        upcoming support polygon before the foot lifts.
        """
        pts = np.array([stance_feet[leg] for leg in stance_feet]).reshape(-1, 3)
        chosen = [leg for leg in (support_legs or stance_feet) if leg in stance_feet]
        origin = np.mean([stance_feet[leg] for leg in chosen], axis=0) if chosen else np.zeros(3)
        est = estimate_terrain(pts, orientation)
        if est.valid:
            self.estimate = replace(est, origin=origin)
        elif self.estimate is None:
            C_BF = orientation.inverse()
            self.estimate = TerrainEstimate(C_BF.rotate([0.0, 0.0, 1.0]), C_BF, Rotation3.identity(), origin, True)
        else:
            # keep the plane orientation, follow the current stance feet
            C_BF = self.estimate.C_BF
            self.estimate = TerrainEstimate(self.estimate.normal, C_BF, orientation * C_BF, origin, True)
        return self.estimate

    def step(
        self,
        state: BaseState,
        stance_feet: dict,
        jacobians: dict,
        velocity_x: float = 0.0,
        yaw_rate: float = 0.0,
        support_legs=None,
    ) -> ControlOutput:
        est = self.update_estimate(stance_feet, state.orientation, support_legs)
        target = desired_base_pose(est, self.model, velocity_x)
        wrench = virtual_wrench(state, target, est, self.model, self.gains)
        sol = distribute_forces(wrench.b, stance_feet, self.model, jacobians, est)
        turned = apply_turning_offset(sol, yaw_rate, self.model)
        return ControlOutput(est, target, wrench, sol, turned, stance_torques(turned, jacobians))
