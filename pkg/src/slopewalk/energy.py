"""Slope-dependent locomotion energy and velocity models.

Slopes are in degrees along the heading, positive uphill. Energies are
locomotion-only (standby power already removed) in J/m under Earth gravity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

SLOPE_DOMAIN = 25.0

PLANAR_ASCENT = (737.7, 0.02979, 0.0233, 0.5126)
PLANAR_DESCENT = (139.3, -0.1333, 634.7, 0.0479)
POINT_POLY = (0.003763, 0.01768, 0.9459, -9.302, 825.0)

# path averages (m/s) used when no velocity table is supplied
DEFAULT_VELOCITY = {"point": (0.28, 0.25), "planar": (0.27, 0.26)}

MARS_DIVISOR = 3.0
STANDBY_POWER = 100.0


class SlopeDomainError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyModel:
    foot_type: str = "planar"
    planar_ascent: tuple[float, float, float, float] = PLANAR_ASCENT
    planar_descent: tuple[float, float, float, float] = PLANAR_DESCENT
    point_poly: tuple[float, float, float, float, float] = POINT_POLY
    domain: float = SLOPE_DOMAIN

    def __post_init__(self):
        if self.foot_type not in ("point", "planar"):
            raise ValueError(f"unknown foot type '{self.foot_type}'")

    @classmethod
    def from_dict(cls, d: dict) -> EnergyModel:
        kw = {"foot_type": d.get("foot_type", "planar")}
        for key in ("planar_ascent", "planar_descent", "point_poly"):
            if key in d:
                kw[key] = tuple(float(v) for v in d[key])
        if "domain" in d:
            kw["domain"] = float(d["domain"])
        return cls(**kw)

    def min_energy(self) -> float:
        """Lower bound of J/m over the domain (dense sweep; used for pruning)."""
        s = np.linspace(-self.domain, self.domain, 20001)
        return float(np.min(energy_per_meter(self, s))) * (1.0 - 1e-9)


def _two_term_exp(coef, x):
    a, b, c, d = coef
    return a * np.exp(b * x) + c * np.exp(d * x)


def _horner(coef, x):
    acc = np.zeros_like(x) + coef[0]
    for c in coef[1:]:
        acc = acc * x + c
    return acc


def energy_per_meter(model: EnergyModel, slope):
    """J/m at ``slope`` degrees; scalars in, float out; arrays in, arrays out."""
    x = np.asarray(slope, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > model.domain + 1e-9):
        raise SlopeDomainError(f"slope outside [-{model.domain}, {model.domain}] deg")
    if model.foot_type == "point":
        e = _horner(model.point_poly, x)
    else:
        # exactly 0 deg uses the ascent fit
        e = np.where(x >= 0.0, _two_term_exp(model.planar_ascent, x), _two_term_exp(model.planar_descent, x))
    return float(e) if e.ndim == 0 else e


def planar_descent_at_zero(model: EnergyModel) -> float:
    a, _, c, _ = model.planar_descent
    return a + c


@dataclass(frozen=True)
class VelocityModel:
    """Piecewise-linear slope -> m/s table; constant per direction by default."""

    foot_type: str = "planar"
    table: tuple[tuple[float, float], ...] | None = None

    def velocity(self, slope):
        x = np.asarray(slope, dtype=float)
        if self.table:
            pts = sorted(self.table)
            v = np.interp(x, [p[0] for p in pts], [p[1] for p in pts])
        else:
            up, down = DEFAULT_VELOCITY[self.foot_type]
            v = np.where(x >= 0.0, up, down)
        if np.any(v <= 0):
            raise ValueError("velocity table must be positive")
        return float(v) if np.ndim(v) == 0 else v

    @property
    def approximate(self) -> bool:
        return self.table is None


@dataclass(frozen=True)
class PowerAccounting:
    standby_power: float = STANDBY_POWER
    mars_divisor: float = MARS_DIVISOR

    def __post_init__(self):
        if self.standby_power < 0:
            raise ValueError("standby power must be non-negative")


def energy_from_power(i_rms: float, v_rms: float, v_act: float, acct: PowerAccounting | None = None) -> float:
    """Locomotion energy per meter from RMS electrical readings and heading speed."""
    acct = acct or PowerAccounting()
    if not v_act > 0:
        raise ValueError("heading velocity must be positive")
    return (i_rms * v_rms - acct.standby_power) / v_act


def mars_scale(value, acct: PowerAccounting | None = None):
    acct = acct or PowerAccounting()
    if not np.all(np.isfinite(value)):
        raise ValueError("value must be finite")
    return value / acct.mars_divisor


def heading_slope_on_plane(gamma: float, aoa, convention: str = "surface"):
    """Slope seen along a heading at angle-of-attack ``aoa`` on a plane of inclination ``gamma``.

    ``surface``: aoa measured on the slope surface, sin(b) = sin(g) cos(a).
    ``projected``: aoa measured in horizontal projection, tan(b) = tan(g) cos(a).
    """
    g = math.radians(gamma)
    a = np.radians(aoa)
    if convention == "surface":
        b = np.arcsin(math.sin(g) * np.cos(a))
    elif convention == "projected":
        b = np.arctan(math.tan(g) * np.cos(a))
    else:
        raise ValueError(f"unknown convention '{convention}'")
    b = np.degrees(b)
    return float(b) if np.ndim(b) == 0 else b


def aoa_objective(model: EnergyModel, gamma: float, aoa, convention: str = "surface"):
    """Energy to reach a point a unit distance up the fall line, walking at ``aoa``."""
    beta = heading_slope_on_plane(gamma, aoa, convention)
    return energy_per_meter(model, beta) / np.cos(np.radians(aoa))


@dataclass
class AoaResult:
    aoa_deg: float
    objective: float
    curve: list[tuple[float, float]] = field(default_factory=list)


def optimal_aoa(model: EnergyModel, gamma: float, convention: str = "surface", with_curve: bool = False):
    """Energy-minimizing angle of attack (deg) for ascending a slope of ``gamma`` deg."""
    if not 0.0 <= gamma <= model.domain:
        raise ValueError("gamma must lie in [0, domain]")
    grid = np.arange(0.0, 90.0, 0.1)
    obj = aoa_objective(model, gamma, grid, convention)
    k = int(np.argmin(obj))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    best, fbest = float(grid[k]), float(obj[k])
    if hi > lo:
        res = minimize_scalar(
            lambda a: float(aoa_objective(model, gamma, a, convention)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-4},
        )
        if res.fun < fbest:
            best, fbest = float(res.x), float(res.fun)
    if not with_curve:
        return best
    return AoaResult(best, fbest, [(float(a), float(o)) for a, o in zip(grid, obj)])
