"""Quasi-static walking simulator on an analytic inclined plane.

Rigid torso, massless legs. Stance feet are pinned to ground anchors; the
force each stance foot exerts on the torso is the controller's command,
limited by unilateral contact and Coulomb friction of the ground. When the
command leaves the ground's friction cone the anchor slides (viscous slip).
The legs are planar and cannot push sideways, so each stance foot also acts
as a stiff passive spring in the base y direction. A weak roll spring stands
in for the missing lateral leg dynamics.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .control import (
    BaseState,
    Controller,
    InfeasibleContactError,
    RobotModel,
    VmcGains,
    check_constraints,
)
from .gait import LEGS, GaitSchedule, contact_state, step_length_for, swing_trajectory
from .geom import Rotation3
from .kinematics import WorkspaceError, inverse_kinematics, jacobian, max_step_length

DEFAULT_INERTIA = (0.21, 0.94, 1.06)  # kg m^2, body frame


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimWorld:
    inclination: float = 0.0  # deg, positive uphill along the fall line
    aoa: float = 0.0  # deg between heading (world x) and the uphill fall line
    mu_ground: float = math.tan(math.radians(35.0))
    stiffness: float = 2.0e4  # N/m, normal penalty stiffness (sets sinkage)
    tick: float = 0.002
    slip_damping: float = 400.0  # N s/m, tangential resistance while sliding
    lateral_stiffness: float = 5000.0  # N/m, passive foot stiffness along base y
    lateral_damping: float = 150.0
    roll_stiffness: float = 300.0  # N m/rad
    roll_damping: float = 30.0
    inertia: tuple[float, float, float] = DEFAULT_INERTIA

    def __post_init__(self):
        if not -30.0 <= self.inclination <= 30.0:
            raise ValueError("inclination must lie in [-30, 30] deg")
        if not self.tick > 0:
            raise ValueError("tick must be positive")
        if not self.stiffness > 0:
            raise ValueError("stiffness must be positive")
        if self.mu_ground < 0:
            raise ValueError("mu_ground must be non-negative")

    @property
    def normal(self) -> np.ndarray:
        g = math.radians(self.inclination)
        a = math.radians(self.aoa)
        s = math.tan(g)
        n = np.array([-s * math.cos(a), -s * math.sin(a), 1.0])
        return n / np.linalg.norm(n)

    def height(self, x: float, y: float) -> float:
        s = math.tan(math.radians(self.inclination))
        a = math.radians(self.aoa)
        return s * (x * math.cos(a) + y * math.sin(a))

    def project(self, point: np.ndarray, direction: np.ndarray) -> np.ndarray:
        """Intersection of the line ``point + s * direction`` with the plane."""
        n = self.normal
        denom = float(direction @ n)
        if abs(denom) < 1e-9:
            raise SimulationError("leg direction parallel to the ground")
        s = -float(point @ n) / denom  # the plane passes through the origin
        return point + s * direction


@dataclass
class SimLog:
    time: list = field(default_factory=list)
    position: list = field(default_factory=list)  # world, m
    rpy: list = field(default_factory=list)  # rad
    target_rpy: list = field(default_factory=list)  # rad
    contacts: list = field(default_factory=list)  # leg -> bool per tick
    slip: dict = field(default_factory=lambda: {leg: 0.0 for leg in LEGS})  # m, cumulative
    slip_series: list = field(default_factory=list)  # total slip per tick, m
    torques: list = field(default_factory=list)  # (4, 2) N m
    work: list = field(default_factory=list)  # J, cumulative positive work
    residual: list = field(default_factory=list)  # wrench tracking residual, N / N m
    feet: list = field(default_factory=list)  # leg -> stance foot in the hip frame (x, z), m
    violations: dict = field(default_factory=lambda: {"min_normal": 0, "friction_cone": 0, "torque_limit": 0})
    infeasible_ticks: int = 0
    lost_contacts: int = 0
    step_clamped: bool = False
    fell_at: float | None = None  # s, set when the run stops after a fall
    distance: float = 0.0

    def contact_counts(self) -> np.ndarray:
        return np.array([sum(c.values()) for c in self.contacts])

    def incline_pitch_deg(self) -> np.ndarray:
        """Nose-up base pitch in degrees (equals the inclination when aligned)."""
        return -np.degrees(np.array(self.rpy)[:, 1])

    def target_incline_pitch_deg(self) -> np.ndarray:
        return -np.degrees(np.array(self.target_rpy)[:, 1])

    @property
    def total_slip(self) -> float:
        return float(sum(self.slip.values()))

    def slip_per_cycle(self, cycle_time: float) -> float:
        """Total slip divided by the number of gait cycles actually simulated."""
        elapsed = self.time[-1] if self.time else 0.0
        return self.total_slip / max(elapsed / cycle_time, 1e-12)

    @property
    def total_work(self) -> float:
        return self.work[-1] if self.work else 0.0

    def write_csv(self, path) -> None:
        header = ["time_s", "x_m", "y_m", "z_m", "roll_rad", "pitch_rad", "yaw_rad", "target_pitch_rad"]
        header += [f"contact_{leg}" for leg in LEGS]
        header += [f"tau_{leg}_{j}_Nm" for leg in LEGS for j in (1, 2)]
        header += ["slip_total_m", "work_J"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for k, t in enumerate(self.time):
                row = [f"{t:.6f}", *(f"{v:.6f}" for v in self.position[k]), *(f"{v:.6f}" for v in self.rpy[k])]
                row.append(f"{self.target_rpy[k][1]:.6f}")
                row += [int(self.contacts[k][leg]) for leg in LEGS]
                row += [f"{v:.6f}" for v in np.ravel(self.torques[k])]
                row += [f"{self.slip_series[k]:.6f}", f"{self.work[k]:.6f}"]
                w.writerow(row)


@dataclass
class _Foot:
    stance: bool = True
    lost: bool = False
    anchor: np.ndarray | None = None  # world, m
    liftoff: np.ndarray | None = None  # hip frame (x, z) at liftoff
    q_prev: np.ndarray | None = None
    sink: float = 0.0  # m, penalty penetration from the last normal force

    def contact_point(self, normal: np.ndarray) -> np.ndarray:
        return self.anchor - self.sink * normal


def _initial_state(world: SimWorld, model: RobotModel, schedule: GaitSchedule, v_des: float):
    """Steady-gait start: base on target, feet spread according to their stance phase."""
    n = world.normal
    x_dir = np.array([1.0, 0.0, 0.0]) - n[0] * n
    x_dir /= np.linalg.norm(x_dir)
    y_dir = np.cross(n, x_dir)
    R = Rotation3.from_matrix(np.column_stack([x_dir, y_dir, n]))
    h = model.hip_height_target
    up = R.inverse().rotate([0.0, 0.0, 1.0])
    shift = h * up[0] / up[2]  # along the plane, base ahead of the footprint origin
    pos = R.rotate([shift, 0.0, h])
    t_stance = schedule.duty_factor * schedule.cycle_time
    phase = contact_state(schedule, 0.0).phase
    anchors = {}
    for leg, geom in model.legs.items():
        hx, hy, _ = geom.attachment
        x = hx + v_des * t_stance * (0.5 - phase[leg])
        anchors[leg] = R.rotate([x, hy, 0.0])
    return pos, R, anchors, shift


def run_walk(
    world: SimWorld,
    model: RobotModel,
    schedule: GaitSchedule,
    v_des: float,
    duration: float,
    seed: int = 0,
    gains: VmcGains | None = None,
    foot_noise: float = 0.0,
    shift_lead: float = 0.25,
) -> SimLog:
    """Closed-loop walk along world x; returns the per-tick log.

    ``shift_lead`` (s): before a foot lifts off, the base is already centered
    over the feet that will support the next swing. Zero disables the shift.
    """
    if duration < schedule.cycle_time:
        raise ValueError("duration must cover at least one gait cycle")
    if v_des < 0:
        raise ValueError("v_des must be non-negative")
    rng = np.random.default_rng(seed)
    dt = world.tick
    legs = model.legs
    hips = {leg: np.array(legs[leg].attachment, dtype=float) for leg in LEGS}
    I_body = np.diag(world.inertia)
    I_inv = np.linalg.inv(I_body)
    gvec = np.array([0.0, 0.0, -model.gravity])
    n_g = world.normal
    mu_g = world.mu_ground

    h = model.hip_height_target
    max_step = max_step_length(legs["LF"], h, margin=0.03)
    t_stance = schedule.duty_factor * schedule.cycle_time
    step, clamped = step_length_for(schedule, v_des, max_step)
    v_cmd = step / schedule.cycle_time  # reduced when the step is clamped
    log = SimLog(step_clamped=clamped)

    pos, R, anchors, base_offset = _initial_state(world, model, schedule, v_cmd)
    vel = np.zeros(3)
    omega = np.zeros(3)
    start = pos.copy()

    sched0 = contact_state(schedule, 0.0)
    feet = {}
    for leg in LEGS:
        feet[leg] = _Foot(sched0.stance[leg], False, anchors[leg] if sched0.stance[leg] else None)

    ctrl = Controller(model, gains)
    prev_solution = None
    work = 0.0
    no_support_since = None
    n_ticks = round(duration / dt)
    for k in range(n_ticks + 1):
        t = k * dt
        sched = contact_state(schedule, t)
        R_T = R.inverse()

        # -- contact transitions
        for leg in LEGS:
            f = feet[leg]
            want = sched.stance[leg]
            if f.stance and not want:
                if f.anchor is not None:
                    rel = R_T.rotate(f.anchor - pos) - hips[leg]
                    f.liftoff = np.array([rel[0], rel[2]])
                else:
                    f.liftoff = np.array([0.0, -h])
                f.stance, f.lost, f.anchor, f.q_prev, f.sink = False, False, None, None, 0.0
            elif not f.stance and want:
                f.stance = True
                lo = f.liftoff if f.liftoff is not None else np.array([0.0, -h])
                # neutral point: mid-stance under the hip, minus the uphill base offset
                x_td = 0.5 * v_cmd * t_stance - base_offset
                target = swing_trajectory(schedule, 1.0, lo, x_td - lo[0])
                tip = pos + R.rotate(hips[leg] + np.array([target[0], 0.0, target[1]]))
                anchor = world.project(tip, -R.rotate([0.0, 0.0, 1.0]))
                rel = R_T.rotate(anchor - pos) - hips[leg]
                try:
                    inverse_kinematics(legs[leg], (rel[0], rel[2]))
                    f.anchor, f.lost = anchor, False
                except WorkspaceError:
                    f.anchor, f.lost = None, True
                    log.lost_contacts += 1

        # -- stance kinematics
        stance_feet, jac, qs, hip_xz = {}, {}, {}, {}
        for leg in LEGS:
            f = feet[leg]
            if not f.stance or f.lost:
                continue
            rel_b = R_T.rotate(f.contact_point(n_g) - pos)
            rel = rel_b - hips[leg]
            try:
                q = inverse_kinematics(legs[leg], (rel[0], rel[2]))
            except WorkspaceError:
                f.lost, f.anchor = True, None
                log.lost_contacts += 1
                continue
            meas = rel_b.copy()
            if foot_noise > 0:
                meas = meas + rng.uniform(-foot_noise, foot_noise, 3)
            stance_feet[leg] = meas
            hip_xz[leg] = (float(rel[0]), float(rel[2]))
            jac[leg] = jacobian(legs[leg], q)
            qs[leg] = q.q

        # -- controller
        state = BaseState(pos, vel, R, omega)
        forces_b = {}
        torques = np.zeros((4, 2))
        target_rpy = (0.0, 0.0, 0.0)
        residual = float("nan")
        if stance_feet:
            try:
                ahead = contact_state(schedule, t + shift_lead).stance if shift_lead > 0 else sched.stance
                support = [leg for leg in stance_feet if ahead[leg]]
                out = ctrl.step(state, stance_feet, jac, velocity_x=v_cmd, support_legs=support or None)
                base_offset = float(out.target.position[0])
                sol = out.turned
                residual = out.solution.residual
                prev_solution = sol
                for key, v in check_constraints(out.solution, jac, model).items():
                    log.violations[key] += v
                target_rpy = out.target.orientation.rpy()
                for i, leg in enumerate(LEGS):
                    if leg in sol.lambdas:
                        forces_b[leg] = sol.force_base(leg)
                        torques[i] = out.torques[leg]
            except InfeasibleContactError:
                log.infeasible_ticks += 1
                if prev_solution is not None:
                    for leg in stance_feet:
                        if leg in prev_solution.lambdas:
                            forces_b[leg] = prev_solution.force_base(leg)

        # -- ground interaction
        F_tot = model.mass * gvec
        M_tot = np.zeros(3)
        y_b = R.rotate([0.0, 1.0, 0.0])
        slip_tick = 0.0
        for leg, fb in forces_b.items():
            f = feet[leg]
            r_w = f.contact_point(n_g) - pos
            # passive lateral leg stiffness at the foot
            lat_err = float(R_T.rotate(r_w)[1] - hips[leg][1])
            v_foot = vel + np.cross(omega, r_w)
            F_lat = (world.lateral_stiffness * lat_err - world.lateral_damping * float(v_foot @ y_b)) * y_b
            F = R.rotate(fb) + F_lat
            fn = float(F @ n_g)
            if fn <= 0.0:
                f.sink = 0.0
                continue
            f.sink = fn / world.stiffness
            Ft = F - fn * n_g
            ft = float(np.linalg.norm(Ft))
            limit = mu_g * fn
            if ft > limit:
                excess = Ft * (1.0 - limit / ft)
                Ft = Ft - excess
                slide = -excess / world.slip_damping * dt
                f.anchor = f.anchor + slide
                d = float(np.linalg.norm(slide))
                log.slip[leg] += d
                slip_tick += d
            F = fn * n_g + Ft
            F_tot = F_tot + F
            M_tot = M_tot + np.cross(r_w, F)

        # passive roll spring
        roll = R.rpy()[0]
        omega_b = R_T.rotate(omega)
        M_roll = np.array([-world.roll_stiffness * roll - world.roll_damping * omega_b[0], 0.0, 0.0])
        M_tot = M_tot + R.rotate(M_roll)

        # -- work and log (before integrating)
        for i, leg in enumerate(LEGS):
            f = feet[leg]
            if leg in qs and f.q_prev is not None:
                dq = (qs[leg] - f.q_prev) / dt
                work += max(float(torques[i] @ dq), 0.0) * dt
            f.q_prev = qs.get(leg)
        log.time.append(t)
        log.position.append(pos.copy())
        log.rpy.append(R.rpy())
        log.target_rpy.append(tuple(target_rpy))
        log.contacts.append({leg: leg in forces_b for leg in LEGS})
        log.torques.append(torques)
        log.slip_series.append(log.total_slip)
        log.work.append(work)
        log.residual.append(residual)
        log.feet.append(hip_xz)
        if k == n_ticks:
            break
        # a fall ends the run: torso near the ground or unsupported for half a second
        if forces_b:
            no_support_since = None
        elif no_support_since is None:
            no_support_since = t
        clearance = float(pos @ n_g)
        unsupported = no_support_since is not None and t - no_support_since > 0.5
        if clearance < 0.5 * legs["LF"].reach_min or unsupported:
            log.fell_at = t
            break

        # -- semi-implicit Euler
        vel = vel + dt * F_tot / model.mass
        pos = pos + dt * vel
        omega_b = R_T.rotate(omega)
        torque_b = R_T.rotate(M_tot)
        domega_b = I_inv @ (torque_b - np.cross(omega_b, I_body @ omega_b))
        omega = R.rotate(omega_b + dt * domega_b)
        R = Rotation3.from_rotvec(omega * dt) * R
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(omega))):
            raise SimulationError(f"state diverged at t={t:.3f} s (pose is not finite)")

    log.distance = float(np.linalg.norm((pos - start)[:2]))
    return log
