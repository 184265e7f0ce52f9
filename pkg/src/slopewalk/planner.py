"""Energy-optimal global path planning: RRT* over SE(2) with Dubins steering.

Edge costs integrate the slope-dependent energy per meter along the heading
(midpoint rule). Infeasible edges (slope cap, map bounds, NODATA) carry an
infinite cost instead of raising, so the tree loop stays branch-free.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import (
    EnergyModel,
    PowerAccounting,
    VelocityModel,
    energy_per_meter,
    mars_scale,
)
from .geom import (
    DUBINS_TYPES,
    TWO_PI,
    DubinsPath,
    Se2State,
    dubins_shortest,
    dubins_shortest_batch,
    sample_dubins_batch,
    wrap_angle,
)
from .terrain import ElevationGrid, heading_slopes

INFEASIBLE = math.inf
_WORD_INDEX = {w: k for k, w in enumerate(DUBINS_TYPES)}


class PlanningError(RuntimeError):
    def __init__(self, message: str, leg: int | None = None):
        super().__init__(message if leg is None else f"leg {leg}: {message}")
        self.leg = leg


@dataclass(frozen=True)
class PlannerConfig:
    turning_radius: float = 2.5
    iterations: int = 5000
    goal_bias: float = 0.05
    goal_tolerance_xy: float = 0.5
    goal_tolerance_theta: float = 0.2
    step: float = 6.0  # steering truncation (m of Dubins arclength)
    ds: float = 0.5
    slope_cap: float = 25.0
    seed: int = 0
    max_neighbors: int = 40
    sample_bounds: tuple[float, float, float, float] | None = None  # xmin, xmax, ymin, ymax
    threads: int = 1
    shortcut: bool = True  # post-pass joining non-adjacent path poses when cheaper

    def __post_init__(self):
        if not self.turning_radius > 0:
            raise ValueError("turning_radius must be positive")
        if not self.ds > 0:
            raise ValueError("ds must be positive")
        if not 0.0 <= self.goal_bias < 1.0:
            raise ValueError("goal_bias must lie in [0, 1)")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")

    @classmethod
    def from_dict(cls, d: dict) -> PlannerConfig:
        kw = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        if kw.get("sample_bounds") is not None:
            kw["sample_bounds"] = tuple(float(v) for v in kw["sample_bounds"])
        return cls(**kw)


@dataclass
class PlanResult:
    xs: np.ndarray  # midpoint samples along the path
    ys: np.ndarray
    thetas: np.ndarray
    seg: np.ndarray  # arclength represented by each sample
    slopes: np.ndarray  # heading slope, degrees
    e_per_m: np.ndarray
    energy: float
    distance: float
    time: float
    segments: list[DubinsPath]
    iterations: int
    seed: int
    cost_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_nodes: int = 0
    legs: list[PlanResult] = field(default_factory=list)

    @property
    def cum_energy(self) -> np.ndarray:
        return np.cumsum(self.e_per_m * self.seg)

    def slope_histogram(self, edges=(0, 5, 10, 15, 20, 25)) -> dict[str, float]:
        """Path length (m) per |heading slope| bin."""
        a = np.abs(self.slopes)
        out = {}
        for lo, hi in itertools.pairwise(edges):
            sel = (a >= lo) & ((a < hi) if hi != edges[-1] else (a <= hi))
            out[f"{lo}-{hi}"] = float(self.seg[sel].sum())
        return out

    def length_above(self, slope_deg: float) -> float:
        return float(self.seg[np.abs(self.slopes) > slope_deg].sum())


# -- edge costs ---------------------------------------------------------------


def _sample_counts(lengths: np.ndarray, ds: float) -> np.ndarray:
    return np.where(lengths > 0.0, np.maximum(np.ceil(lengths / ds - 1e-9), 1), 0).astype(int)


def _batch_samples(x0, y0, t0, word, params, radius, ds):
    """Midpoint samples for many Dubins paths; returns (owner, x, y, theta, seg)."""
    lengths = params.sum(axis=1) * radius
    counts = _sample_counts(lengths, ds)
    owner = np.repeat(np.arange(len(lengths)), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(owner.size) - first[owner]
    seg = lengths[owner] / counts[owner] if owner.size else np.zeros(0)
    s = (k + 0.5) * seg
    x, y, th = sample_dubins_batch(x0[owner], y0[owner], t0[owner], word[owner], params[owner], radius, s)
    return owner, x, y, th, seg


def _batch_costs(grid, model, cap, x0, y0, t0, word, params, radius, ds) -> np.ndarray:
    owner, x, y, th, seg = _batch_samples(x0, y0, t0, word, params, radius, ds)
    n = len(params)
    if owner.size == 0:
        return np.zeros(n)
    slope = heading_slopes(grid, x, y, th)
    bad = ~(np.abs(slope) <= cap)  # NaN counts as bad
    e = energy_per_meter(model, np.where(bad, 0.0, slope))
    cost = np.bincount(owner, weights=e * seg, minlength=n)
    infeasible = np.bincount(owner, weights=bad.astype(float), minlength=n) > 0
    return np.where(infeasible, INFEASIBLE, cost)


def edge_cost(grid: ElevationGrid, model: EnergyModel, edge: DubinsPath, ds: float = 0.5, cap: float = 25.0) -> float:
    """Energy (J) along ``edge`` by the midpoint rule; ``inf`` when infeasible."""
    if not ds > 0:
        raise ValueError("ds must be positive")
    s = edge.start
    c = _batch_costs(
        grid,
        model,
        cap,
        np.array([s.x]),
        np.array([s.y]),
        np.array([s.theta]),
        np.array([_WORD_INDEX[edge.path_type]]),
        np.array([edge.params]),
        edge.radius,
        ds,
    )
    return float(c[0])


def straight_cost(grid, model, start: Se2State, goal: Se2State, ds: float = 0.5, cap: float = 25.0) -> float:
    """Cost of the head-on straight segment from ``start`` to ``goal`` (headings ignored)."""
    theta = math.atan2(goal.y - start.y, goal.x - start.x)
    d = start.distance(goal)
    path = DubinsPath("LSL", (0.0, d, 0.0), 1.0, Se2State(start.x, start.y, theta))
    return edge_cost(grid, model, path, ds, cap)


# -- RRT* -------------------------------------------------------------------


class _Tree:
    def __init__(self, capacity: int):
        self.x = np.empty(capacity)
        self.y = np.empty(capacity)
        self.th = np.empty(capacity)
        self.cost = np.empty(capacity)
        self.parent = np.full(capacity, -1, dtype=int)
        self.children: list[set[int]] = []
        self.n = 0

    def add(self, x, y, th, cost, parent) -> int:
        k = self.n
        self.x[k], self.y[k], self.th[k], self.cost[k], self.parent[k] = x, y, th, cost, parent
        self.children.append(set())
        if parent >= 0:
            self.children[parent].add(k)
        self.n += 1
        return k

    def reparent(self, k: int, parent: int, cost: float) -> None:
        self.children[self.parent[k]].discard(k)
        self.parent[k] = parent
        self.children[parent].add(k)
        delta = cost - self.cost[k]
        stack = [k]
        while stack:
            j = stack.pop()
            self.cost[j] += delta
            stack.extend(self.children[j])


class _Planner:
    def __init__(self, grid, model, config: PlannerConfig, start: Se2State, goal: Se2State):
        self.grid, self.model, self.cfg = grid, model, config
        self.start, self.goal = start, goal
        self.emin = model.min_energy()
        xmin, xmax, ymin, ymax = grid.slope_bounds()
        if config.sample_bounds is not None:
            bx0, bx1, by0, by1 = config.sample_bounds
            xmin, xmax, ymin, ymax = max(xmin, bx0), min(xmax, bx1), max(ymin, by0), min(ymax, by1)
        if not (xmin < xmax and ymin < ymax):
            raise ValueError("empty sampling region")
        self.bounds = (xmin, xmax, ymin, ymax)
        # shrinking-ball constant over the SE(2) measure (area x 2 pi)
        measure = (xmax - xmin) * (ymax - ymin) * TWO_PI
        unit_ball = 4.0 / 3.0 * math.pi
        self.gamma = 2.0 * (1.0 + 1.0 / 3.0) ** (1.0 / 3.0) * (measure / unit_ball) ** (1.0 / 3.0)
        self.rewires = 0
        self.pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None

    def close(self):
        if self.pool is not None:
            self.pool.shutdown()

    def costs(self, x0, y0, t0, word, params) -> np.ndarray:
        cfg = self.cfg
        args = (self.grid, self.model, cfg.slope_cap)
        tail = (cfg.turning_radius, cfg.ds)
        if self.pool is None or len(params) < 2 * cfg.threads:
            return _batch_costs(*args, x0, y0, t0, word, params, *tail)
        chunks = np.array_split(np.arange(len(params)), cfg.threads)
        futures = [
            self.pool.submit(_batch_costs, *args, x0[c], y0[c], t0[c], word[c], params[c], *tail) for c in chunks
        ]
        return np.concatenate([f.result() for f in futures])

    def radius(self, n: int) -> float:
        r = self.gamma * (math.log(n + 1) / (n + 1)) ** (1.0 / 3.0)
        return max(r, 2.0 * self.cfg.step)

    def run(self) -> tuple[_Tree, np.ndarray, dict]:
        cfg = self.cfg
        R = cfg.turning_radius
        rng = np.random.default_rng(cfg.seed)
        tree = _Tree(cfg.iterations + 1)
        tree.add(self.start.x, self.start.y, self.start.theta, 0.0, -1)
        goal = self.goal
        goal_edges: dict[int, float] = {}  # node -> cost of its connection to the goal
        self.tolerance_hits: set[int] = set()  # nodes accepted as the goal without an extra edge
        history = np.empty(cfg.iterations)
        best = INFEASIBLE
        xmin, xmax, ymin, ymax = self.bounds
        for it in range(cfg.iterations):
            if rng.random() < cfg.goal_bias:
                sx, sy, sth = goal.x, goal.y, goal.theta
            else:
                sx, sy = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
                sth = rng.uniform(-math.pi, math.pi)
            n = tree.n
            X, Y, TH, C = tree.x[:n], tree.y[:n], tree.th[:n], tree.cost[:n]

            # nearest by Dubins length among the Euclidean-closest nodes
            d2 = (X - sx) ** 2 + (Y - sy) ** 2
            k = min(n, 16)
            cand = np.argpartition(d2, k - 1)[:k] if n > k else np.arange(n)
            _, par = dubins_shortest_batch(X[cand], Y[cand], TH[cand], sx, sy, sth, R)
            near_idx = int(cand[np.argmin(par.sum(axis=1))])
            steer = dubins_shortest(Se2State(X[near_idx], Y[near_idx], TH[near_idx]), Se2State(sx, sy, sth), R)
            if steer.length > cfg.step:
                new = _sample_state(steer, cfg.step)
            else:
                new = Se2State(sx, sy, sth)
            nx, ny, nth = new.x, new.y, new.theta

            # neighborhood: Euclidean prefilter, then Dubins length (both directions in one batch)
            r = self.radius(n)
            d2 = (X - nx) ** 2 + (Y - ny) ** 2
            cand = np.flatnonzero(d2 <= r * r)
            if cand.size == 0:
                cand = np.array([near_idx])
            elif cand.size > 3 * cfg.max_neighbors:
                # Dubins length >= Euclidean distance, so the Euclidean-closest pool keeps the
                # likely winners; the pool is kept in index order for determinism
                pool = np.argpartition(d2[cand], 3 * cfg.max_neighbors - 1)[: 3 * cfg.max_neighbors]
                cand = cand[np.sort(pool)]
            cand = np.union1d(cand, [near_idx])
            m = cand.size
            fx = np.concatenate([X[cand], np.full(m, nx)])
            fy = np.concatenate([Y[cand], np.full(m, ny)])
            fth = np.concatenate([TH[cand], np.full(m, nth)])
            tx = np.concatenate([np.full(m, nx), X[cand]])
            ty = np.concatenate([np.full(m, ny), Y[cand]])
            tth = np.concatenate([np.full(m, nth), TH[cand]])
            w_all, p_all = dubins_shortest_batch(fx, fy, fth, tx, ty, tth, R)
            L_all = p_all.sum(axis=1) * R
            keep = L_all[:m] <= r
            keep[cand == near_idx] = True
            sel = np.flatnonzero(keep)
            if sel.size > cfg.max_neighbors:
                sel = np.sort(sel[np.argsort(L_all[sel], kind="stable")[: cfg.max_neighbors]])
            cand = cand[sel]
            m = cand.size
            L_in = L_all[sel]
            # rewiring candidates must beat their current cost even with the cheapest terrain
            new_lb = float(np.min(C[cand] + L_in * self.emin))
            out_mask = new_lb + L_all[sel + keep.size] * self.emin < C[cand]
            # reaching the goal itself only records goal edges; no duplicate goal nodes
            is_goal = nx == goal.x and ny == goal.y and nth == goal.theta
            if is_goal:
                out_mask[:] = False
            rows = np.concatenate([sel, sel[out_mask] + keep.size])

            # goal edge rides along in the same batch
            dg = math.hypot(nx - goal.x, ny - goal.y)
            at_goal = (
                not is_goal
                and dg <= cfg.goal_tolerance_xy
                and abs(wrap_angle(nth - goal.theta)) <= cfg.goal_tolerance_theta
            )
            try_goal = not (at_goal or is_goal) and dg <= 2.0 * cfg.step
            bx, by, bth = fx[rows], fy[rows], fth[rows]
            bw, bp = w_all[rows], p_all[rows]
            if try_goal:
                w_g, p_g = dubins_shortest_batch(nx, ny, nth, goal.x, goal.y, goal.theta, R)
                try_goal = float(p_g.sum()) * R <= 2.0 * cfg.step
                if try_goal:
                    bx, by, bth = np.append(bx, nx), np.append(by, ny), np.append(bth, nth)
                    bw, bp = np.append(bw, w_g), np.vstack([bp, p_g.reshape(1, 3)])
            e_all = self.costs(bx, by, bth, bw, bp)
            e_in = e_all[:m]
            e_out = e_all[m : m + int(out_mask.sum())]

            if is_goal:
                for node, e in zip(cand, e_in):
                    if np.isfinite(e) and e < goal_edges.get(int(node), INFEASIBLE):
                        goal_edges[int(node)] = float(e)
                if goal_edges:
                    best = min(best, min(tree.cost[k] + e for k, e in goal_edges.items()))
                history[it] = best
                continue

            # choose parent
            total = C[cand] + e_in
            j = int(np.argmin(total))
            if not np.isfinite(total[j]):
                history[it] = best
                continue
            new_cost = float(total[j])
            k_new = tree.add(nx, ny, nth, new_cost, int(cand[j]))

            # rewire neighbors through the new node
            for node, e in zip(cand[out_mask], e_out):
                node = int(node)
                c_via = new_cost + e
                if c_via < tree.cost[node] and node != tree.parent[k_new]:
                    tree.reparent(node, k_new, c_via)
                    self.rewires += 1

            if at_goal:
                goal_edges[k_new] = 0.0
                self.tolerance_hits.add(k_new)
            elif try_goal and np.isfinite(e_all[-1]):
                goal_edges[k_new] = float(e_all[-1])
            if goal_edges:
                nodes = np.fromiter(goal_edges, dtype=int)
                vals = tree.cost[nodes] + np.fromiter(goal_edges.values(), dtype=float)
                best = min(best, float(vals.min()))
            history[it] = best
        return tree, history, goal_edges


def _sample_state(path: DubinsPath, s: float) -> Se2State:
    w = np.array(_WORD_INDEX[path.path_type])
    x, y, th = sample_dubins_batch(
        path.start.x, path.start.y, path.start.theta, w, np.array(path.params), path.radius, np.array(s)
    )
    return Se2State(float(x), float(y), float(th))


def _extract(tree: _Tree, goal_edges: dict, tolerance_hits: set, goal: Se2State) -> list[Se2State]:
    nodes = list(goal_edges)
    totals = [tree.cost[k] + goal_edges[k] for k in nodes]
    best = nodes[int(np.argmin(totals))]
    chain = []
    k = best
    while k >= 0:
        chain.append(k)
        k = tree.parent[k]
    chain.reverse()
    poses = [Se2State(tree.x[k], tree.y[k], tree.th[k]) for k in chain]
    if best not in tolerance_hits:
        poses.append(goal)
    return poses


def _shortcut(planner: _Planner, poses: list[Se2State]) -> list[Se2State]:
    """Cheapest subsequence of the path poses joined by direct Dubins edges (DP over all pairs)."""
    n = len(poses)
    if n < 3:
        return poses
    R = planner.cfg.turning_radius
    ii, jj = np.triu_indices(n, k=1)
    px = np.array([p.x for p in poses])
    py = np.array([p.y for p in poses])
    pt = np.array([p.theta for p in poses])
    word, params = dubins_shortest_batch(px[ii], py[ii], pt[ii], px[jj], py[jj], pt[jj], R)
    cost = np.full((n, n), INFEASIBLE)
    cost[ii, jj] = planner.costs(px[ii], py[ii], pt[ii], word, params)
    dp = np.full(n, INFEASIBLE)
    dp[0] = 0.0
    prev = np.zeros(n, dtype=int)
    for j in range(1, n):
        via = dp[:j] + cost[:j, j]
        prev[j] = int(np.argmin(via))
        dp[j] = via[prev[j]]
    keep = [n - 1]
    while keep[-1] != 0:
        keep.append(prev[keep[-1]])
    return [poses[k] for k in reversed(keep)]


def evaluate_path(
    grid: ElevationGrid,
    model: EnergyModel,
    segments: list[DubinsPath],
    ds: float = 0.5,
    cap: float = 25.0,
    velocity: VelocityModel | None = None,
) -> PlanResult:
    """Sample a chain of Dubins segments and integrate energy, distance and time."""
    velocity = velocity or VelocityModel(model.foot_type)
    if segments:
        radius = segments[0].radius
        x0 = np.array([p.start.x for p in segments])
        y0 = np.array([p.start.y for p in segments])
        t0 = np.array([p.start.theta for p in segments])
        word = np.array([_WORD_INDEX[p.path_type] for p in segments])
        params = np.array([p.params for p in segments], dtype=float).reshape(-1, 3)
        _, x, y, th, seg = _batch_samples(x0, y0, t0, word, params, radius, ds)
    else:
        x = y = th = seg = np.zeros(0)
    slopes = heading_slopes(grid, x, y, th)
    if np.any(~(np.abs(slopes) <= cap)):
        raise PlanningError("path leaves the traversable region")
    e = np.asarray(energy_per_meter(model, slopes), dtype=float).reshape(-1)
    v = np.asarray(velocity.velocity(slopes), dtype=float).reshape(-1)
    return PlanResult(
        xs=x,
        ys=y,
        thetas=np.mod(th + math.pi, TWO_PI) - math.pi,
        seg=seg,
        slopes=slopes,
        e_per_m=e,
        energy=float(np.sum(e * seg)),
        distance=float(np.sum(seg)),
        time=float(np.sum(seg / v)),
        segments=list(segments),
        iterations=0,
        seed=0,
    )


def plan(
    grid: ElevationGrid,
    model: EnergyModel,
    config: PlannerConfig,
    start: Se2State,
    goal: Se2State,
    velocity: VelocityModel | None = None,
) -> PlanResult:
    """RRT* from ``start`` to ``goal``; raises :class:`PlanningError` when no path is found."""
    xmin, xmax, ymin, ymax = grid.slope_bounds()
    for name, s in (("start", start), ("goal", goal)):
        if not (xmin <= s.x <= xmax and ymin <= s.y <= ymax):
            raise PlanningError(f"{name} outside the map")
        slope = float(heading_slopes(grid, s.x, s.y, s.theta))
        if not abs(slope) <= config.slope_cap:
            raise PlanningError(f"{name} pose exceeds the slope cap ({slope:.1f} deg)")
    planner = _Planner(grid, model, config, start, goal)
    try:
        tree, history, goal_edges = planner.run()
        if not goal_edges:
            raise PlanningError(f"no feasible path after {config.iterations} iterations")
        poses = _extract(tree, goal_edges, planner.tolerance_hits, goal)
        if config.shortcut:
            poses = _shortcut(planner, poses)
    finally:
        planner.close()
    R = config.turning_radius
    segments = [dubins_shortest(a, b, R) for a, b in itertools.pairwise(poses)]
    result = evaluate_path(grid, model, segments, config.ds, config.slope_cap, velocity)
    result.iterations = config.iterations
    result.seed = config.seed
    result.cost_history = history
    result.n_nodes = tree.n
    return result


def plan_mission(
    grid: ElevationGrid,
    model: EnergyModel,
    config: PlannerConfig,
    waypoints: list[Se2State],
    velocity: VelocityModel | None = None,
) -> PlanResult:
    """Plan each consecutive waypoint pair independently and concatenate."""
    if len(waypoints) < 2:
        raise ValueError("a mission needs at least two waypoints")
    legs = []
    for i, (a, b) in enumerate(itertools.pairwise(waypoints)):
        if a == b:
            leg = evaluate_path(grid, model, [], config.ds, config.slope_cap, velocity)
            leg.seed = config.seed
        else:
            try:
                leg = plan(grid, model, config, a, b, velocity)
            except PlanningError as exc:
                raise PlanningError(str(exc), leg=i) from exc
        legs.append(leg)
    cat = lambda name: np.concatenate([getattr(leg, name) for leg in legs])
    return PlanResult(
        xs=cat("xs"),
        ys=cat("ys"),
        thetas=cat("thetas"),
        seg=cat("seg"),
        slopes=cat("slopes"),
        e_per_m=cat("e_per_m"),
        energy=sum(leg.energy for leg in legs),
        distance=sum(leg.distance for leg in legs),
        time=sum(leg.time for leg in legs),
        segments=[p for leg in legs for p in leg.segments],
        iterations=config.iterations,
        seed=config.seed,
        cost_history=legs[-1].cost_history,
        n_nodes=sum(leg.n_nodes for leg in legs),
        legs=legs,
    )


# -- reporting ----------------------------------------------------------------

# reference (Earth kJ, reported Mars-gravity kJ) mission energy pairs
REFERENCE_MARS_PAIRS = ((340.0, 113.0), (368.0, 123.0), (364.0, 88.0), (234.0, 78.0))


def mars_pair_check(pairs=REFERENCE_MARS_PAIRS, acct: PowerAccounting | None = None) -> list[dict]:
    """Recompute printed Mars-scaled energies; flag pairs that do not match division by the divisor."""
    acct = acct or PowerAccounting()
    out = []
    for earth, printed in pairs:
        scaled = float(mars_scale(earth, acct))
        ok = abs(scaled - printed) <= 0.5
        row = {"earth_kJ": earth, "printed_mars_kJ": printed, "computed_mars_kJ": round(scaled, 1), "consistent": ok}
        if not ok:
            row["note"] = (
                f"{earth:g}/{acct.mars_divisor:g} = {scaled:.1f}; {printed:g} matches {printed * acct.mars_divisor:g} kJ"
            )
        out.append(row)
    return out


def _stats(r: PlanResult, acct: PowerAccounting, mars: bool) -> dict:
    t = r.time
    loco = r.energy / t if t > 0 else 0.0
    row = {
        "distance_m": r.distance,
        "energy_kJ": r.energy / 1e3,
        "time_min": t / 60.0,
        "power_locomotion_W": loco,
        "power_total_W": loco + acct.standby_power if t > 0 else 0.0,
        "energy_per_m_J": r.energy / r.distance if r.distance > 0 else 0.0,
        "velocity_m_s": r.distance / t if t > 0 else 0.0,
    }
    if mars:
        row["energy_mars_kJ"] = float(mars_scale(r.energy / 1e3, acct))
        row["energy_per_m_mars_J"] = float(mars_scale(row["energy_per_m_J"], acct))
    return row


def mission_summary(
    result: PlanResult,
    model: EnergyModel,
    acct: PowerAccounting | None = None,
    mars: bool = False,
    velocity: VelocityModel | None = None,
) -> dict:
    """Per-leg and total statistics in the mission-table layout."""
    acct = acct or PowerAccounting()
    velocity = velocity or VelocityModel(model.foot_type)
    legs = result.legs or [result]
    summary = {
        "foot_type": model.foot_type,
        "legs": [_stats(leg, acct, mars) for leg in legs],
        "total": _stats(result, acct, mars),
        "slope_histogram_m": result.slope_histogram(),
        "iterations": result.iterations,
        "seed": result.seed,
        "standby_power_W": acct.standby_power,
        "time_estimate_approximate": velocity.approximate,
    }
    if mars:
        summary["mars_divisor"] = acct.mars_divisor
        summary["reference_mars_pairs"] = mars_pair_check(acct=acct)
    return summary


def write_path_csv(result: PlanResult, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["x_m", "y_m", "theta_rad", "heading_slope_deg", "e_J_per_m", "cum_J"])
    for row in zip(result.xs, result.ys, result.thetas, result.slopes, result.e_per_m, result.cum_energy):
        w.writerow([f"{v:.6f}" for v in row])


def write_geojson(result: PlanResult, stream) -> None:
    coords = [[round(float(x), 3), round(float(y), 3)] for x, y in zip(result.xs, result.ys)]
    doc = {
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": coords},
        "properties": {"energy_J": result.energy, "distance_m": result.distance},
    }
    json.dump(doc, stream)
