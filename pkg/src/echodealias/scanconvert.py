"""Polar-to-Cartesian scan conversion for display.

All processing in this toolkit stays on the polar grid; scan conversion
exists only to render sector images.  The sector apex sits at the
Cartesian origin, depth increases along +y, and ``x = r sin(theta)``,
``y = r cos(theta)``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .field import PolarGrid


def polar_to_xy(grid: PolarGrid, r: np.ndarray, theta: np.ndarray):
    """Map polar coordinates (meters, radians) to Cartesian (x, y)."""
    return r * np.sin(theta), r * np.cos(theta)


def xy_to_polar(x: np.ndarray, y: np.ndarray):
    """Inverse of :func:`polar_to_xy`."""
    return np.hypot(x, y), np.arctan2(x, y)


def sector_bounds(grid: PolarGrid) -> tuple[float, float, float, float]:
    """Tight Cartesian bounding box (x_min, x_max, y_min, y_max) of the sector."""
    thetas = [grid.theta_min, grid.theta_max]
    if grid.theta_min < 0.0 < grid.theta_max:
        thetas.append(0.0)
    xs, ys = [], []
    for r in (grid.r_min, grid.r_max):
        for t in thetas:
            x, y = polar_to_xy(grid, np.float64(r), np.float64(t))
            xs.append(float(x))
            ys.append(float(y))
    # widest x always occurs at r_max and the extreme angles
    return min(xs), max(xs), min(ys), max(ys)


def scan_convert(
    raster: np.ndarray,
    grid: PolarGrid,
    out_width: int,
    out_height: int,
    fill_value: float = 0.0,
) -> np.ndarray:
    """Resample one polar-grid raster onto a Cartesian sector image.

    Uses bilinear interpolation in (range, angle) index space; output
    pixels outside the sector are set to ``fill_value``.  Returns a
    float32 raster of shape (out_height, out_width) with row 0 at the
    sector apex side.
    """
    raster = np.asarray(raster, dtype=np.float64)
    if raster.shape != grid.shape:
        raise InvalidArgumentError(
            f"raster shape {raster.shape} does not match grid {grid.shape}"
        )
    if out_width < 2 or out_height < 2:
        raise InvalidArgumentError("output dimensions must be >= 2")

    x_min, x_max, y_min, y_max = sector_bounds(grid)
    xs = np.linspace(x_min, x_max, out_width)
    ys = np.linspace(y_min, y_max, out_height)
    xg, yg = np.meshgrid(xs, ys)

    r, theta = xy_to_polar(xg, yg)
    inside = (
        (r >= grid.r_min)
        & (r <= grid.r_max)
        & (theta >= grid.theta_min)
        & (theta <= grid.theta_max)
    )

    # fractional indices into the polar raster
    ri = (r - grid.r_min) / (grid.r_max - grid.r_min) * (grid.n_radial - 1)
    ti = (theta - grid.theta_min) / (grid.theta_max - grid.theta_min) * (grid.n_angular - 1)
    ri = np.clip(ri, 0.0, grid.n_radial - 1)
    ti = np.clip(ti, 0.0, grid.n_angular - 1)

    r0 = np.clip(np.floor(ri).astype(np.int64), 0, grid.n_radial - 2)
    t0 = np.clip(np.floor(ti).astype(np.int64), 0, grid.n_angular - 2)
    fr = ri - r0
    ft = ti - t0

    v00 = raster[r0, t0]
    v01 = raster[r0, t0 + 1]
    v10 = raster[r0 + 1, t0]
    v11 = raster[r0 + 1, t0 + 1]
    interp = (
        v00 * (1 - fr) * (1 - ft)
        + v01 * (1 - fr) * ft
        + v10 * fr * (1 - ft)
        + v11 * fr * ft
    )
    out = np.where(inside, interp, float(fill_value))
    return out.astype(np.float32)
