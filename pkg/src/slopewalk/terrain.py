"""Elevation grids: ESRI ASCII I/O, synthetic craters and slope queries.

Samples sit at cell centers, so node ``(i, j)`` (``i`` counted from the
south) is at ``(origin_x + (j + 0.5) * cellsize, origin_y + (i + 0.5) * cellsize)``.
Heights are stored south-to-north; NODATA cells hold NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .geom import Se2State


class GridFormatError(ValueError):
    """Malformed ESRI ASCII input."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OutOfBoundsError(ValueError):
    pass


class NoDataError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ElevationGrid:
    ncols: int
    nrows: int
    cellsize: float
    origin_x: float
    origin_y: float
    heights: np.ndarray  # (nrows, ncols), row 0 = southernmost
    nodata: float = -9999.0
    _grad: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.ncols < 2 or self.nrows < 2:
            raise ValueError("grid needs at least 2x2 samples")
        if not self.cellsize > 0:
            raise ValueError("cellsize must be positive")
        h = np.array(self.heights, dtype=float)
        if h.shape != (self.nrows, self.ncols):
            raise ValueError(f"heights shape {h.shape} != ({self.nrows}, {self.ncols})")
        h.setflags(write=False)
        object.__setattr__(self, "heights", h)

    # -- node geometry ----------------------------------------------------
    @property
    def x0(self) -> float:
        """x of the first node column."""
        return self.origin_x + 0.5 * self.cellsize

    @property
    def y0(self) -> float:
        return self.origin_y + 0.5 * self.cellsize

    @property
    def x_max(self) -> float:
        return self.x0 + (self.ncols - 1) * self.cellsize

    @property
    def y_max(self) -> float:
        return self.y0 + (self.nrows - 1) * self.cellsize

    def node_xy(self, i: int, j: int) -> tuple[float, float]:
        return self.x0 + j * self.cellsize, self.y0 + i * self.cellsize

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        xs = self.x0 + np.arange(self.ncols) * self.cellsize
        ys = self.y0 + np.arange(self.nrows) * self.cellsize
        return xs, ys

    def slope_bounds(self) -> tuple[float, float, float, float]:
        """Region where :func:`heading_slope` is defined (xmin, xmax, ymin, ymax)."""
        c = self.cellsize
        return self.x0 + c, self.x_max - c, self.y0 + c, self.y_max - c

    @property
    def gradient_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Node-wise central differences (dh/dx, dh/dy); NaN on the border."""
        if self._grad is None:
            h = self.heights
            c = self.cellsize
            gx = np.full_like(h, np.nan)
            gy = np.full_like(h, np.nan)
            gx[:, 1:-1] = (h[:, 2:] - h[:, :-2]) / (2.0 * c)
            gy[1:-1, :] = (h[2:, :] - h[:-2, :]) / (2.0 * c)
            gx.setflags(write=False)
            gy.setflags(write=False)
            object.__setattr__(self, "_grad", (gx, gy))
        return self._grad


def _bilinear(values: np.ndarray, grid: ElevationGrid, x, y):
    """Bilinear interpolation of a node array; NaN outside the node hull."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = (x - grid.x0) / grid.cellsize
    fy = (y - grid.y0) / grid.cellsize
    inside = (fx >= 0) & (fy >= 0) & (fx <= grid.ncols - 1) & (fy <= grid.nrows - 1)
    j = np.clip(np.floor(np.where(inside, fx, 0.0)).astype(int), 0, grid.ncols - 2)
    i = np.clip(np.floor(np.where(inside, fy, 0.0)).astype(int), 0, grid.nrows - 2)
    tx = np.where(inside, fx - j, 0.0)
    ty = np.where(inside, fy - i, 0.0)
    v00 = values[i, j]
    v01 = values[i, j + 1]
    v10 = values[i + 1, j]
    v11 = values[i + 1, j + 1]
    # zero-weight corners must not leak NaN into exact node queries
    a = _wmul(v00, (1 - tx) * (1 - ty)) + _wmul(v01, tx * (1 - ty))
    b = _wmul(v10, (1 - tx) * ty) + _wmul(v11, tx * ty)
    return np.where(inside, a + b, np.nan)


def _bilinear_weights(grid: ElevationGrid, x, y):
    """Lower-left node indices and the four corner weights, plus the inside mask."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fx = (x - grid.x0) / grid.cellsize
    fy = (y - grid.y0) / grid.cellsize
    inside = (fx >= 0) & (fy >= 0) & (fx <= grid.ncols - 1) & (fy <= grid.nrows - 1)
    j = np.clip(np.floor(np.where(inside, fx, 0.0)).astype(int), 0, grid.ncols - 2)
    i = np.clip(np.floor(np.where(inside, fy, 0.0)).astype(int), 0, grid.nrows - 2)
    tx = np.where(inside, fx - j, 0.0)
    ty = np.where(inside, fy - i, 0.0)
    return i, j, ((1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty, inside)


def _wmul(v, w):
    return np.where(w == 0.0, 0.0, v * w)


# -- ESRI ASCII -------------------------------------------------------------

_HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "xllcenter", "yllcenter", "cellsize", "nodata_value")


def load_esri_ascii(stream: TextIO) -> ElevationGrid:
    """Parse an ESRI ASCII grid. The first data row is the northernmost."""
    header: dict[str, float] = {}
    values: list[float] = []
    lineno = 0
    in_data = False
    for lineno, raw in enumerate(stream, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        if not in_data:
            key = tokens[0].lower()
            if key in _HEADER_KEYS:
                if len(tokens) != 2:
                    raise GridFormatError(f"header '{tokens[0]}' needs exactly one value", lineno)
                try:
                    header[key] = float(tokens[1])
                except ValueError:
                    raise GridFormatError(f"non-numeric header value '{tokens[1]}'", lineno) from None
                continue
            if key[0].isalpha() and key not in ("nan", "inf", "-inf"):
                raise GridFormatError(f"unknown header key '{tokens[0]}'", lineno)
            in_data = True
        for tok in tokens:
            try:
                values.append(float(tok))
            except ValueError:
                raise GridFormatError(f"non-numeric token '{tok}'", lineno) from None

    for key in ("ncols", "nrows", "cellsize"):
        if key not in header:
            raise GridFormatError(f"missing header '{key}'", lineno)
    if "xllcorner" in header:
        ox = header["xllcorner"]
    elif "xllcenter" in header:
        ox = header["xllcenter"] - 0.5 * header["cellsize"]
    else:
        raise GridFormatError("missing header 'xllcorner'", lineno)
    if "yllcorner" in header:
        oy = header["yllcorner"]
    elif "yllcenter" in header:
        oy = header["yllcenter"] - 0.5 * header["cellsize"]
    else:
        raise GridFormatError("missing header 'yllcorner'", lineno)

    ncols, nrows = header["ncols"], header["nrows"]
    if ncols != int(ncols) or nrows != int(nrows) or ncols < 2 or nrows < 2:
        raise GridFormatError("ncols/nrows must be integers >= 2", lineno)
    ncols, nrows = int(ncols), int(nrows)
    if header["cellsize"] <= 0:
        raise GridFormatError("cellsize must be positive", lineno)
    if len(values) != ncols * nrows:
        raise GridFormatError(f"expected {ncols * nrows} values, found {len(values)}", lineno)

    nodata = header.get("nodata_value", -9999.0)
    h = np.array(values, dtype=float).reshape(nrows, ncols)[::-1]
    if "nodata_value" in header:
        h = np.where(h == nodata, np.nan, h)
    return ElevationGrid(ncols, nrows, header["cellsize"], ox, oy, h, nodata)


def write_esri_ascii(grid: ElevationGrid, stream: TextIO) -> None:
    """Write ``grid`` with 6 significant digits, north row first."""
    stream.write(f"ncols {grid.ncols}\n")
    stream.write(f"nrows {grid.nrows}\n")
    stream.write(f"xllcorner {grid.origin_x:.6g}\n")
    stream.write(f"yllcorner {grid.origin_y:.6g}\n")
    stream.write(f"cellsize {grid.cellsize:.6g}\n")
    stream.write(f"NODATA_value {grid.nodata:.6g}\n")
    h = np.where(np.isnan(grid.heights), grid.nodata, grid.heights)
    for row in h[::-1]:
        stream.write(" ".join(f"{v:.6g}" for v in row))
        stream.write("\n")


# -- synthetic crater ---------------------------------------------------------


@dataclass(frozen=True)
class CraterSpec:
    diameter: float = 400.0
    depth: float = 70.0
    rim_height: float = 5.0
    center_x: float | None = None
    center_y: float | None = None
    map_size: float = 600.0
    cellsize: float = 1.0

    def __post_init__(self):
        if not (self.depth > 0 and self.diameter > 0 and self.cellsize > 0):
            raise ValueError("depth, diameter and cellsize must be positive")
        if not self.map_size > self.diameter:
            raise ValueError("map_size must exceed the crater diameter")
        if self.rim_height < 0:
            raise ValueError("rim_height must be non-negative")

    @property
    def center(self) -> tuple[float, float]:
        cx = self.map_size / 2 if self.center_x is None else self.center_x
        cy = self.map_size / 2 if self.center_y is None else self.center_y
        return cx, cy


def crater_profile(spec: CraterSpec, r):
    """Height at radial distance ``r``: parabolic bowl plus Gaussian rim."""
    r = np.asarray(r, dtype=float)
    radius = spec.diameter / 2
    bowl = np.where(r < radius, -spec.depth * (1.0 - (r / radius) ** 2), 0.0)
    sigma = 0.1 * spec.diameter
    rim = spec.rim_height * np.exp(-((r - radius) ** 2) / (2.0 * sigma * sigma))
    return bowl + rim


def gen_crater(spec: CraterSpec) -> ElevationGrid:
    n = round(spec.map_size / spec.cellsize)
    if n < 2:
        raise ValueError("map too small for the cellsize")
    cx, cy = spec.center
    coords = (np.arange(n) + 0.5) * spec.cellsize
    xx, yy = np.meshgrid(coords, coords)
    r = np.hypot(xx - cx, yy - cy)
    return ElevationGrid(n, n, spec.cellsize, 0.0, 0.0, crater_profile(spec, r))


# -- queries ----------------------------------------------------------------


def height_at(grid: ElevationGrid, x: float, y: float) -> float:
    if not (grid.x0 <= x <= grid.x_max and grid.y0 <= y <= grid.y_max):
        raise OutOfBoundsError(f"({x}, {y}) outside grid")
    h = float(_bilinear(grid.heights, grid, x, y))
    if math.isnan(h):
        raise NoDataError(f"({x}, {y}) touches a NODATA cell")
    return h


def heights_at(grid: ElevationGrid, xs, ys) -> np.ndarray:
    """Vectorized :func:`height_at`; NaN where out of bounds or NODATA."""
    return _bilinear(grid.heights, grid, xs, ys)


def gradient_at(grid: ElevationGrid, x: float, y: float) -> np.ndarray:
    """Central-difference gradient of the interpolated surface, one cell each side."""
    c = grid.cellsize
    xmin, xmax, ymin, ymax = grid.slope_bounds()
    if not (xmin <= x <= xmax and ymin <= y <= ymax):
        raise OutOfBoundsError(f"({x}, {y}) too close to the grid edge for a slope query")
    gx = (height_at(grid, x + c, y) - height_at(grid, x - c, y)) / (2.0 * c)
    gy = (height_at(grid, x, y + c) - height_at(grid, x, y - c)) / (2.0 * c)
    return np.array([gx, gy])


def heading_slope(grid: ElevationGrid, state: Se2State) -> float:
    """Terrain slope along the heading in degrees, positive when ascending."""
    g = gradient_at(grid, state.x, state.y)
    return math.degrees(math.atan(g[0] * math.cos(state.theta) + g[1] * math.sin(state.theta)))


def heading_slopes(grid: ElevationGrid, xs, ys, thetas) -> np.ndarray:
    """Vectorized :func:`heading_slope`; NaN where undefined.

    Interpolating node-wise central differences is algebraically the same as
    differencing interpolated heights one cell apart.
    """
    gxg, gyg = grid.gradient_grids
    thetas = np.asarray(thetas, dtype=float)
    # projecting the node gradients onto the heading first needs one interpolation, not two
    i, j, w = _bilinear_weights(grid, xs, ys)
    c, s = np.cos(thetas), np.sin(thetas)
    acc = 0.0
    for (di, dj), wk in zip(((0, 0), (0, 1), (1, 0), (1, 1)), w):
        v = gxg[i + di, j + dj] * c + gyg[i + di, j + dj] * s
        acc = acc + _wmul(v, wk)
    inside = w[4]
    return np.degrees(np.arctan(np.where(inside, acc, np.nan)))


def plane_grid(
    slope_x: float, slope_y: float, n: int = 50, cellsize: float = 1.0, offset: float = 0.0
) -> ElevationGrid:
    """Grid sampled from ``h = slope_x * x + slope_y * y + offset``."""
    coords = (np.arange(n) + 0.5) * cellsize
    xx, yy = np.meshgrid(coords, coords)
    return ElevationGrid(n, n, cellsize, 0.0, 0.0, slope_x * xx + slope_y * yy + offset)
