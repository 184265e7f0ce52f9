"""Command-line entry point: ``slopewalk <subcommand> [flags]``.

Every subcommand writes its outputs plus a ``*.manifest.json`` holding the
resolved configuration, seed and sha256 hashes of inputs and outputs. A JSON
config file (``--config`` or the ``SLOPEWALK_CONFIG`` environment variable)
supplies defaults per subcommand; explicit flags win. Angles on the command
line are in degrees.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .control import RobotModel
from .energy import (
    EnergyModel,
    PowerAccounting,
    VelocityModel,
    energy_per_meter,
    optimal_aoa,
)
from .gait import GaitSchedule
from .geom import Se2State
from .planner import (
    PlannerConfig,
    PlanningError,
    mission_summary,
    plan_mission,
    write_geojson,
    write_path_csv,
)
from .sim import SimulationError, SimWorld, run_walk
from .terrain import (
    CraterSpec,
    GridFormatError,
    gen_crater,
    load_esri_ascii,
    write_esri_ascii,
)

CONFIG_ENV = "SLOPEWALK_CONFIG"

# built-in defaults per subcommand; config file values override these, flags override both
DEFAULTS = {
    "gen-crater": {
        "diameter": 400.0,
        "depth": 70.0,
        "rim": 5.0,
        "size": 600.0,
        "cellsize": 1.0,
        "out": "crater.asc",
    },
    "energy": {"min": -25.0, "max": 25.0, "step": 0.5, "out": "-"},
    "aoa": {"foot": "planar", "gamma": 25.0, "convention": "surface", "out": "-"},
    "plan": {
        "grid": None,
        "start": None,
        "goal": None,
        "via": [],
        "foot": "planar",
        "iterations": 5000,
        "seed": 0,
        "turning_radius": 2.5,
        "step": 6.0,
        "ds": 0.5,
        "slope_cap": 25.0,
        "goal_bias": 0.05,
        "bounds": None,
        "threads": 1,
        "mars": False,
        "geojson": False,
        "standby": 100.0,
        "out_dir": "plan_out",
    },
    "simulate": {
        "slope": 15.0,
        "aoa": 0.0,
        "gait": "static",
        "v": 0.1,
        "duration": 10.0,
        "mu": math.tan(math.radians(35.0)),
        "seed": 0,
        "out_dir": "sim_out",
    },
}


class UsageError(ValueError):
    pass


def _pose(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,theta_deg, got '{text}'") from None
    if len(vals) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,theta_deg, got '{text}'")
    return vals


def _bounds(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("expected xmin,xmax,ymin,ymax")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slopewalk", description="Slope locomotion toolkit")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV})")
    sub = p.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS  # unset flags stay absent so config values can apply

    g = sub.add_parser("gen-crater", help="write a synthetic crater as an ESRI ASCII grid")
    g.add_argument("--diameter", type=float, default=S, help="m")
    g.add_argument("--depth", type=float, default=S, help="m")
    g.add_argument("--rim", type=float, default=S, help="rim height, m")
    g.add_argument("--size", type=float, default=S, help="map edge length, m")
    g.add_argument("--cellsize", type=float, default=S, help="m")
    g.add_argument("--out", default=S)

    e = sub.add_parser("energy", help="tabulate J/m against heading slope for both foot models")
    e.add_argument("--min", type=float, default=S, help="deg")
    e.add_argument("--max", type=float, default=S, help="deg")
    e.add_argument("--step", type=float, default=S, help="deg")
    e.add_argument("--out", default=S, help="CSV path or - for stdout")

    a = sub.add_parser("aoa", help="energy-optimal angle of attack on a uniform slope")
    a.add_argument("--foot", choices=("point", "planar"), default=S)
    a.add_argument("--gamma", type=float, default=S, help="slope inclination, deg")
    a.add_argument("--convention", choices=("surface", "projected"), default=S)
    a.add_argument("--out", default=S, help="JSON path or - for stdout")

    pl = sub.add_parser("plan", help="energy-optimal RRT* path over an elevation grid")
    pl.add_argument("--grid", default=S, help="ESRI ASCII grid; omitted means the default synthetic crater")
    pl.add_argument("--start", type=_pose, default=S, help="x,y,theta_deg")
    pl.add_argument("--goal", type=_pose, default=S, help="x,y,theta_deg")
    pl.add_argument("--via", type=_pose, action="append", default=S, help="intermediate waypoint x,y,theta_deg")
    pl.add_argument("--foot", choices=("point", "planar"), default=S)
    pl.add_argument("--iterations", type=int, default=S)
    pl.add_argument("--seed", type=int, default=S)
    pl.add_argument("--turning-radius", dest="turning_radius", type=float, default=S, help="m")
    pl.add_argument("--step", type=float, default=S, help="steering step, m")
    pl.add_argument("--ds", type=float, default=S, help="edge sample spacing, m")
    pl.add_argument("--slope-cap", dest="slope_cap", type=float, default=S, help="deg")
    pl.add_argument("--goal-bias", dest="goal_bias", type=float, default=S)
    pl.add_argument("--bounds", type=_bounds, default=S, help="sampling box xmin,xmax,ymin,ymax")
    pl.add_argument("--threads", type=int, default=S, help="concurrent edge evaluation (paths may differ)")
    pl.add_argument("--mars", action="store_true", default=S, help="add energy columns scaled to Mars gravity")
    pl.add_argument("--geojson", action="store_true", default=S)
    pl.add_argument("--standby", type=float, default=S, help="standby power, W")
    pl.add_argument("--out-dir", dest="out_dir", default=S)

    s = sub.add_parser("simulate", help="closed-loop walk on an inclined plane")
    s.add_argument("--slope", type=float, default=S, help="deg")
    s.add_argument("--aoa", type=float, default=S, help="deg")
    s.add_argument("--gait", default=S, help="static or trot")
    s.add_argument("--v", type=float, default=S, help="desired speed, m/s")
    s.add_argument("--duration", type=float, default=S, help="s")
    s.add_argument("--mu", type=float, default=S, help="ground friction coefficient")
    s.add_argument("--seed", type=int, default=S)
    s.add_argument("--out-dir", dest="out_dir", default=S)
    return p


def load_config(path: str | None) -> dict:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config '{path}': {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object keyed by subcommand")
    return cfg


def resolve(command: str, flags: dict, config: dict) -> dict:
    out = dict(DEFAULTS[command])
    section = config.get(command, {})
    unknown = set(section) - set(out)
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {sorted(unknown)}")
    out.update(section)
    out.update({k: v for k, v in flags.items() if k in out})
    return out


# -- helpers -------------------------------------------------------------------


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path: Path, command: str, cfg: dict, inputs: list[Path], outputs: list[Path]) -> None:
    doc = {
        "subcommand": command,
        "config": cfg,
        "seed": cfg.get("seed"),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": {str(p): _sha256(p) for p in outputs},
        "tool_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _open_out(target: str):
    return sys.stdout if target == "-" else open(target, "w", newline="")


def _state(v) -> Se2State:
    return Se2State(v[0], v[1], math.radians(v[2]))


# -- subcommands -------------------------------------------------------------


def cmd_gen_crater(cfg: dict) -> int:
    spec = CraterSpec(
        diameter=cfg["diameter"],
        depth=cfg["depth"],
        rim_height=cfg["rim"],
        map_size=cfg["size"],
        cellsize=cfg["cellsize"],
    )
    grid = gen_crater(spec)
    out = Path(cfg["out"])
    with open(out, "w") as fh:
        write_esri_ascii(grid, fh)
    write_manifest(_manifest_path(out), "gen-crater", cfg, [], [out])
    return 0


def energy_table(lo: float, hi: float, step: float) -> list[tuple[float, float, float]]:
    if not step > 0 or hi < lo:
        raise UsageError("need step > 0 and max >= min")
    n = math.floor((hi - lo) / step + 1e-9) + 1
    slopes = lo + step * np.arange(n)
    point = energy_per_meter(EnergyModel("point"), slopes)
    planar = energy_per_meter(EnergyModel("planar"), slopes)
    return [(float(s), float(a), float(b)) for s, a, b in zip(slopes, point, planar)]


def cmd_energy(cfg: dict) -> int:
    rows = energy_table(cfg["min"], cfg["max"], cfg["step"])
    fh = _open_out(cfg["out"])
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["slope_deg", "point_J_per_m", "planar_J_per_m"])
        for s, a, b in rows:
            w.writerow([f"{s:.2f}", f"{a:.2f}", f"{b:.2f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    if cfg["out"] != "-":
        out = Path(cfg["out"])
        write_manifest(_manifest_path(out), "energy", cfg, [], [out])
    return 0


def cmd_aoa(cfg: dict) -> int:
    model = EnergyModel(cfg["foot"])
    res = optimal_aoa(model, cfg["gamma"], cfg["convention"], with_curve=True)
    doc = {
        "foot": cfg["foot"],
        "gamma": cfg["gamma"],
        "convention": cfg["convention"],
        "optimal_aoa_deg": res.aoa_deg,
        "objective_J_per_m_of_fall_line": res.objective,
        "objective_curve": [[round(a, 2), o] for a, o in res.curve],
    }
    fh = _open_out(cfg["out"])
    try:
        json.dump(doc, fh)
        fh.write("\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    if cfg["out"] != "-":
        out = Path(cfg["out"])
        write_manifest(_manifest_path(out), "aoa", cfg, [], [out])
    return 0


def cmd_plan(cfg: dict) -> int:
    if cfg["start"] is None or cfg["goal"] is None:
        raise UsageError("plan needs --start and --goal")
    inputs = []
    if cfg["grid"]:
        path = Path(cfg["grid"])
        with open(path) as fh:
            grid = load_esri_ascii(fh)
        inputs.append(path)
    else:
        grid = gen_crater(CraterSpec())
    model = EnergyModel(cfg["foot"])
    pcfg = PlannerConfig(
        turning_radius=cfg["turning_radius"],
        iterations=cfg["iterations"],
        goal_bias=cfg["goal_bias"],
        step=cfg["step"],
        ds=cfg["ds"],
        slope_cap=cfg["slope_cap"],
        seed=cfg["seed"],
        sample_bounds=tuple(cfg["bounds"]) if cfg["bounds"] else None,
        threads=cfg["threads"],
    )
    waypoints = [_state(cfg["start"]), *(_state(v) for v in cfg["via"] or []), _state(cfg["goal"])]
    result = plan_mission(grid, model, pcfg, waypoints)
    acct = PowerAccounting(standby_power=cfg["standby"])
    summary = mission_summary(result, model, acct, mars=cfg["mars"], velocity=VelocityModel(model.foot_type))
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [out_dir / "path.csv", out_dir / "summary.json"]
    with open(outputs[0], "w", newline="") as fh:
        write_path_csv(result, fh)
    with open(outputs[1], "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if cfg["geojson"]:
        outputs.append(out_dir / "path.geojson")
        with open(outputs[-1], "w") as fh:
            write_geojson(result, fh)
    write_manifest(out_dir / "manifest.json", "plan", cfg, inputs, outputs)
    return 0


def simulate_summary(log, schedule: GaitSchedule, slope: float) -> dict:
    counts = log.contact_counts()
    pitch = log.incline_pitch_deg()
    return {
        "slope_deg": slope,
        "gait": schedule.name,
        "duration_s": log.time[-1],
        "min_contacts": int(counts.min()),
        "pitch_min_deg": float(pitch.min()),
        "pitch_max_deg": float(pitch.max()),
        "max_pitch_error_deg": float(np.max(np.abs(pitch - slope))),
        "slip_total_m": log.total_slip,
        "slip_per_cycle_m": log.slip_per_cycle(schedule.cycle_time),
        "work_J": log.total_work,
        "distance_m": log.distance,
        "step_clamped": log.step_clamped,
        "infeasible_ticks": log.infeasible_ticks,
        "fell_at_s": log.fell_at,
    }


def cmd_simulate(cfg: dict) -> int:
    try:
        schedule = GaitSchedule.by_name(cfg["gait"])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    world = SimWorld(inclination=cfg["slope"], aoa=cfg["aoa"], mu_ground=cfg["mu"])
    log = run_walk(world, RobotModel(), schedule, cfg["v"], cfg["duration"], seed=cfg["seed"])
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [out_dir / "log.csv", out_dir / "summary.json"]
    log.write_csv(outputs[0])
    with open(outputs[1], "w") as fh:
        json.dump(simulate_summary(log, schedule, cfg["slope"]), fh, indent=2)
        fh.write("\n")
    write_manifest(out_dir / "manifest.json", "simulate", cfg, [], outputs)
    return 0 if log.fell_at is None else 1


COMMANDS = {
    "gen-crater": cmd_gen_crater,
    "energy": cmd_energy,
    "aoa": cmd_aoa,
    "plan": cmd_plan,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on malformed flags
    flags = vars(args)
    command = flags.pop("command")
    try:
        cfg = resolve(command, flags, load_config(flags.pop("config", None)))
        return COMMANDS[command](cfg)
    except (UsageError, GridFormatError) as exc:
        print(f"slopewalk {command}: error: {exc}", file=sys.stderr)
        return 2
    except (PlanningError, SimulationError, OSError) as exc:
        print(f"slopewalk {command}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        # invalid parameter values (e.g. non-positive cellsize) are usage errors
        print(f"slopewalk {command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
