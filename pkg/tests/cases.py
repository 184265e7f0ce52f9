"""Seeded problem instances shared by module and acceptance tests."""

from dataclasses import replace
from functools import cache, lru_cache

import numpy as np
from scipy.optimize import linprog

from slopewalk.control import (
    RobotModel,
    _leg_constraints,
    _wrench_matrix,
    contact_basis,
)
from slopewalk.energy import EnergyModel
from slopewalk.gait import GaitSchedule
from slopewalk.geom import Se2State
from slopewalk.kinematics import inverse_kinematics, jacobian
from slopewalk.planner import PlannerConfig, plan_mission
from slopewalk.sim import SimWorld, run_walk
from slopewalk.terrain import CraterSpec, gen_crater


def two_leg_instance(seed: int):
    """Random 2-stance-leg contact problem with feasible constraints."""
    rng = np.random.default_rng(seed)
    model = replace(RobotModel(), mu=float(rng.uniform(0.3, 0.9)), f_min_normal=float(rng.uniform(0, 20)))
    pair = [("LF", "RH"), ("RF", "LH"), ("LF", "LH"), ("RF", "RH")][seed % 4]
    legs = model.legs
    feet, jac = {}, {}
    for leg in pair:
        a = legs[leg].attachment
        h = rng.uniform(0.32, 0.45)
        x = rng.uniform(-0.12, 0.12)
        feet[leg] = np.array([a[0] + x, a[1], -h])
        jac[leg] = jacobian(legs[leg], inverse_kinematics(legs[leg], (x, -h)))
    w = model.weight
    b = np.array([0.0, 0.0, w, 0.0, 0.0, 0.0]) + rng.normal(0, [0.4 * w, 0, 0.3 * w, 20, 20, 5])
    return model, feet, jac, b


def grid_problem(model, feet, jac, b):
    """A, b and per-leg (G, h, box) in the layout used by ``oracles.qp_grid_min``."""
    t, n = contact_basis(None)
    A = _wrench_matrix(feet, tuple(feet), t, n)
    bb = np.array(b, float)
    bb[5] = 0.0
    B = np.column_stack([[t[0], t[2]], [n[0], n[2]]])
    Gs, hs, boxes = [], [], []
    for leg in feet:
        G, h, _ = _leg_constraints(jac[leg], B, model)
        Gs.append(G)
        hs.append(h)
        boxes.append(feasible_box(G, h))
    return A, bb, Gs, hs, boxes


def feasible_box(G, h):
    """Axis-aligned bounding box of ``G x <= h`` in 2-D, by four LPs."""
    lo, hi = np.zeros(2), np.zeros(2)
    for k in range(2):
        c = np.zeros(2)
        c[k] = 1.0
        lo[k] = linprog(c, A_ub=G, b_ub=h, bounds=[(None, None)] * 2).fun
        hi[k] = -linprog(-c, A_ub=G, b_ub=h, bounds=[(None, None)] * 2).fun
    return lo, hi


def objective(A, b, x) -> float:
    r = A @ x - b
    return float(r @ r)


@cache
def slope_walk(inclination: float = 15.0, duration: float = 7.5, mu_ground: float | None = None, v: float = 0.1):
    """Static walk up a plane along the fall line, cached across test modules."""
    world = SimWorld(inclination=inclination) if mu_ground is None else SimWorld(inclination, mu_ground=mu_ground)
    return run_walk(world, RobotModel(), GaitSchedule.static_walk(), v, duration, seed=0)


CRATER_START = Se2State(300.0, 300.0, 0.0)
CRATER_GOAL = Se2State(418.0, 300.0, 0.0)
CRATER_BOUNDS = (280.0, 438.0, 220.0, 380.0)


@lru_cache(maxsize=1)
def default_crater():
    return gen_crater(CraterSpec())


@cache
def crater_ascent(seed: int = 0, iterations: int = 20_000, foot: str = "planar"):
    """Floor-to-upper-wall mission on the default synthetic crater."""
    config = PlannerConfig(iterations=iterations, seed=seed, sample_bounds=CRATER_BOUNDS)
    return plan_mission(default_crater(), EnergyModel(foot), config, [CRATER_START, CRATER_GOAL])


# PASS/FAIL lines collected by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
