"""Domain types and wrapping math for 2D color Doppler velocity fields.

A Doppler scanner reports the axial velocity modulo the Nyquist range:
whenever the true velocity magnitude exceeds the Nyquist velocity ``v_n``,
the measured value wraps to the opposite side of the scale, shifted by a
multiple of ``2 * v_n``.  The integer number of wraps per pixel (the
Nyquist number) lives in {-1, 0, +1} for the single-aliasing regime this
toolkit targets.

All raster operations accept float32 or float64 arrays, carry the
arithmetic out in float64, and return the input dtype.  Because the
wrapped value is always smaller in magnitude than the unwrapped one, this
makes ``unwrap_with_labels(wrap(v), nyquist_number(v))`` a bit-exact
round trip.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import InvalidArgumentError

LABEL_VALUES = (-1, 0, 1)


@dataclass(frozen=True)
class PolarGrid:
    """Geometry of a polar (beam-space) raster.

    Rows index range samples along the beam, columns index beams.
    Lengths in meters, angles in radians; ``theta`` is measured from the
    sector axis, increasing with column index.
    """

    n_radial: int
    n_angular: int
    r_min: float
    r_max: float
    theta_min: float
    theta_max: float

    def __post_init__(self):
        if self.n_radial < 2 or self.n_angular < 2:
            raise InvalidArgumentError("grid needs at least 2 samples per axis")
        if not (self.r_max > self.r_min >= 0):
            raise InvalidArgumentError(
                f"need r_max > r_min >= 0, got [{self.r_min}, {self.r_max}]"
            )
        if not (self.theta_max > self.theta_min):
            raise InvalidArgumentError("need theta_max > theta_min")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_radial, self.n_angular)

    def radii(self) -> np.ndarray:
        """Range-sample centers in meters, shape (n_radial,)."""
        return np.linspace(self.r_min, self.r_max, self.n_radial)

    def thetas(self) -> np.ndarray:
        """Beam angles in radians, shape (n_angular,)."""
        return np.linspace(self.theta_min, self.theta_max, self.n_angular)

    def to_header(self) -> dict:
        return {
            "n_radial": self.n_radial,
            "n_angular": self.n_angular,
            "r_min": self.r_min,
            "r_max": self.r_max,
            "theta_min": self.theta_min,
            "theta_max": self.theta_max,
        }

    @classmethod
    def from_header(cls, h: dict) -> "PolarGrid":
        return cls(
            n_radial=int(h["n_radial"]),
            n_angular=int(h["n_angular"]),
            r_min=float(h["r_min"]),
            r_max=float(h["r_max"]),
            theta_min=float(h["theta_min"]),
            theta_max=float(h["theta_max"]),
        )


@dataclass(frozen=True)
class DopplerFrame:
    """One color Doppler frame on a polar grid.

    ``velocity`` is the Doppler velocity in m/s, ``power`` the
    log-compressed Doppler power in [0, 1], both shaped like the grid.
    ``wrapped`` marks frames whose velocities are scanner measurements,
    i.e. already folded into [-v_n, v_n].
    """

    grid: PolarGrid
    velocity: np.ndarray
    power: np.ndarray
    nyquist_velocity: float
    wrapped: bool = False

    def __post_init__(self):
        vel = np.ascontiguousarray(self.velocity, dtype=np.float32)
        pw = np.ascontiguousarray(self.power, dtype=np.float32)
        object.__setattr__(self, "velocity", vel)
        object.__setattr__(self, "power", pw)
        if vel.shape != self.grid.shape or pw.shape != self.grid.shape:
            raise InvalidArgumentError(
                f"raster shapes {vel.shape}/{pw.shape} do not match grid {self.grid.shape}"
            )
        if not np.isfinite(vel).all():
            raise InvalidArgumentError("velocity contains non-finite values")
        if not (self.nyquist_velocity > 0) or not np.isfinite(self.nyquist_velocity):
            raise InvalidArgumentError("nyquist_velocity must be a positive finite number")
        if pw.min() < 0.0 or pw.max() > 1.0 or not np.isfinite(pw).all():
            raise InvalidArgumentError("power values must lie in [0, 1]")
        if self.wrapped and np.abs(vel).max() > self.nyquist_velocity:
            raise InvalidArgumentError(
                "wrapped frame has |velocity| exceeding the Nyquist velocity"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.grid.shape


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel Nyquist numbers in {-1, 0, +1}."""

    labels: np.ndarray = dc_field(default=None)

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int8)
        object.__setattr__(self, "labels", lab)
        if lab.ndim != 2:
            raise InvalidArgumentError("label raster must be 2D")
        if not np.isin(lab, LABEL_VALUES).all():
            raise InvalidArgumentError("labels must lie in {-1, 0, +1}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def any_aliased(self) -> bool:
        return bool(np.any(self.labels != 0))


def _check_velocity_args(v, v_nyquist) -> np.ndarray:
    v = np.asarray(v)
    if not np.issubdtype(v.dtype, np.floating):
        v = v.astype(np.float64)
    if not np.isfinite(v).all():
        raise InvalidArgumentError("velocity raster contains non-finite values")
    if not np.isfinite(v_nyquist) or v_nyquist <= 0:
        raise InvalidArgumentError(f"v_nyquist must be positive and finite, got {v_nyquist}")
    return v


def _wrap_and_count(v64: np.ndarray, v_nyquist: float) -> tuple[np.ndarray, np.ndarray]:
    """Shared kernel: wrapped value and wrap count, mutually consistent.

    Computes n = floor((v + v_n) / (2 v_n)) and w = v - 2 n v_n, then folds
    boundary rounding cases so that w always lands in [-v_n, v_n) with the
    matching n.  Keeping one code path for both quantities guarantees that
    wrap() and nyquist_number() never disagree at interval edges.
    """
    two_vn = 2.0 * float(v_nyquist)
    n = np.floor((v64 + v_nyquist) / two_vn)
    w = v64 - two_vn * n
    high = w >= v_nyquist
    if high.any():
        w = np.where(high, w - two_vn, w)
        n = np.where(high, n + 1.0, n)
    low = w < -v_nyquist
    if low.any():
        w = np.where(low, w + two_vn, w)
        n = np.where(low, n - 1.0, n)
    return w, n


def wrap(v_true, v_nyquist: float) -> np.ndarray:
    """Fold true velocities into the measurable range [-v_n, v_n).

    Equivalent to ``(v + v_n) mod (2 v_n) - v_n`` with a mathematical
    modulo; implemented through the wrap count so the output is exactly
    ``v - 2 n v_n`` for the ``n`` that :func:`nyquist_number` reports.
    """
    v = _check_velocity_args(v_true, v_nyquist)
    out_dtype = v.dtype
    w, _ = _wrap_and_count(v.astype(np.float64), float(v_nyquist))
    return w.astype(out_dtype)


def nyquist_number(v_true, v_nyquist: float) -> np.ndarray:
    """Per-pixel wrap count n = floor((v + v_n) / (2 v_n)) as int64.

    For |v| < 3 v_n the result lies in {-1, 0, +1}.  The returned integers
    are unclamped; callers building a :class:`LabelMap` are responsible
    for staying in the single-aliasing regime.
    """
    v = _check_velocity_args(v_true, v_nyquist)
    _, n = _wrap_and_count(v.astype(np.float64), float(v_nyquist))
    return n.astype(np.int64)


def unwrap_with_labels(v_wrapped, labels, v_nyquist: float) -> np.ndarray:
    """Undo wrapping given per-pixel wrap counts: v + 2 * labels * v_n.

    The correction applied to each pixel is exactly a multiple of
    ``2 * v_nyquist``; velocities are never smoothed or rescaled.
    """
    v = _check_velocity_args(v_wrapped, v_nyquist)
    lab = labels.labels if isinstance(labels, LabelMap) else np.asarray(labels)
    if lab.shape != v.shape:
        raise InvalidArgumentError(
            f"label shape {lab.shape} does not match velocity shape {v.shape}"
        )
    out_dtype = v.dtype
    shift = lab.astype(np.float64) * (2.0 * float(v_nyquist))
    return (v.astype(np.float64) + shift).astype(out_dtype)


def make_model_input(frame: DopplerFrame) -> np.ndarray:
    """Network input raster: Nyquist-normalized velocity times power.

    Output is ``(velocity / v_n) * power`` elementwise, bounded in
    [-1, 1] because wrapped velocities satisfy |v| <= v_n and power lies
    in [0, 1].
    """
    if np.abs(frame.velocity).max() > frame.nyquist_velocity:
        raise InvalidArgumentError(
            "make_model_input expects wrapped velocities (|v| <= v_nyquist)"
        )
    v64 = frame.velocity.astype(np.float64)
    out = (v64 / float(frame.nyquist_velocity)) * frame.power.astype(np.float64)
    return out.astype(np.float32)


def compress_power(raw_power) -> np.ndarray:
    """Log-compress scanner power from [1, 100] to [0, 1] via log10(p)/2.

    Values below 1 are clamped to 1 before the log so the output never
    goes negative; values above 100 clamp to 1 after it.
    """
    p = np.asarray(raw_power, dtype=np.float64)
    if not np.isfinite(p).all():
        raise InvalidArgumentError("power raster contains non-finite values")
    out = np.log10(np.maximum(p, 1.0)) / 2.0
    return np.clip(out, 0.0, 1.0).astype(np.float32)
