"""Synthetic cardiac-like Doppler phantoms with known alias-free ground truth.

Each phantom is a smooth axial-velocity pattern (jet lobes or a vortex
projected onto the beam axis) plus optional Gaussian noise, a plausible
power map, and tissue-like clutter bands near the sector edges.  The
wrapped frame and the label map are derived from the alias-free field
through :mod:`echodealias.field`, so every generated triple is exactly
consistent by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import dff
from .errors import DataFormatError, InvalidArgumentError, OutOfRegimeError
from .field import DopplerFrame, LabelMap, PolarGrid, nyquist_number, wrap

KINDS = ("inflow_jet", "outflow_jet", "vortex", "mixed")

#: Median clinical patch size; rows are range samples, columns are beams.
DEFAULT_GRID = PolarGrid(
    n_radial=192, n_angular=40, r_min=0.015, r_max=0.115,
    theta_min=-0.55, theta_max=0.55,
)
DEFAULT_NYQUIST = 0.6

# velocity bound of clutter/tissue values, as a fraction of v_nyquist
_CLUTTER_SPEED_FRAC = 0.35
_SPIKE_SPEED_FRAC = 0.85
_SPIKE_FRACTION = 0.08
_NOISE_CLIP_SIGMAS = 3.5


@dataclass(frozen=True)
class PhantomSpec:
    """Parameters fully determining one phantom frame."""

    kind: str
    peak_speed: float
    jet_width: float
    jet_center: tuple[float, float]
    noise_sigma: float = 0.0
    clutter_band_width: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgumentError(f"unknown phantom kind {self.kind!r}")
        if not (self.peak_speed > 0):
            raise InvalidArgumentError("peak_speed must be positive")
        if self.noise_sigma < 0:
            raise InvalidArgumentError("noise_sigma must be >= 0")
        if self.clutter_band_width < 0:
            raise InvalidArgumentError("clutter_band_width must be >= 0")


def _jet_field(rr, tt, center, width_theta, width_r, sign):
    r0, t0 = center
    lobe = np.exp(
        -((rr - r0) ** 2) / (2.0 * width_r**2) - ((tt - t0) ** 2) / (2.0 * width_theta**2)
    )
    return sign * lobe


def _vortex_field(grid: PolarGrid, rr, tt, center, core_radius):
    """Lamb-Oseen-style vortex, projected onto the beam (radial) axis."""
    r0, t0 = center
    cx, cy = r0 * np.sin(t0), r0 * np.cos(t0)
    px, py = rr * np.sin(tt), rr * np.cos(tt)
    dx, dy = px - cx, py - cy
    d = np.hypot(dx, dy)
    d_safe = np.maximum(d, 1e-9)
    # tangential speed profile, peaking near the core radius
    u_t = (d_safe / core_radius) * np.exp(0.5 * (1.0 - (d_safe / core_radius) ** 2))
    # tangential unit vector (perpendicular to the center offset)
    ux, uy = -dy / d_safe, dx / d_safe
    # beam (radial) unit vector at each pixel; toward the probe is -r_hat
    bx, by = np.sin(tt), np.cos(tt)
    return u_t * (ux * bx + uy * by)


def generate_frame(
    spec: PhantomSpec,
    grid: PolarGrid = DEFAULT_GRID,
    v_nyquist: float = DEFAULT_NYQUIST,
) -> tuple[DopplerFrame, DopplerFrame, LabelMap]:
    """Generate (alias-free frame, wrapped frame, ground-truth labels).

    Deterministic given ``spec``; raises :class:`OutOfRegimeError` when
    ``peak_speed >= 3 * v_nyquist`` (multiple wrapping is out of scope).
    """
    if not (v_nyquist > 0):
        raise InvalidArgumentError("v_nyquist must be positive")
    if spec.peak_speed >= 3.0 * v_nyquist:
        raise OutOfRegimeError(
            f"peak_speed {spec.peak_speed} reaches triple-Nyquist regime "
            f"(v_nyquist={v_nyquist})"
        )
    rng = np.random.default_rng(spec.seed)
    rr, tt = np.meshgrid(grid.radii(), grid.thetas(), indexing="ij")
    span_r = grid.r_max - grid.r_min

    width_r = span_r * rng.uniform(0.14, 0.24)
    width_theta = max(spec.jet_width / 2.0, 1e-3)
    if spec.kind == "inflow_jet":
        flow = _jet_field(rr, tt, spec.jet_center, width_theta, width_r, +1.0)
    elif spec.kind == "outflow_jet":
        flow = _jet_field(rr, tt, spec.jet_center, width_theta, width_r, -1.0)
    elif spec.kind == "vortex":
        core = span_r * rng.uniform(0.10, 0.18)
        flow = _vortex_field(grid, rr, tt, spec.jet_center, core)
    else:  # mixed: jet plus an offset vortex
        core = span_r * rng.uniform(0.10, 0.18)
        r0, t0 = spec.jet_center
        vort_center = (
            min(max(r0 + span_r * 0.22, grid.r_min), grid.r_max),
            t0 - (grid.theta_max - grid.theta_min) * 0.15,
        )
        flow = _jet_field(rr, tt, spec.jet_center, width_theta, width_r, +1.0)
        flow = flow + 0.7 * _vortex_field(grid, rr, tt, vort_center, core)

    # scale so the strongest axial speed equals peak_speed exactly
    flow = flow * (spec.peak_speed / np.abs(flow).max())

    # broad slow background swirl keeps the field nonzero outside the lobe
    bg_phase = rng.uniform(0.0, 2.0 * np.pi)
    background = 0.05 * v_nyquist * np.sin(
        2.0 * np.pi * (rr - grid.r_min) / span_r + bg_phase
    ) * np.cos(tt * 2.0)
    velocity = flow + background

    if spec.noise_sigma > 0:
        noise = rng.normal(0.0, spec.noise_sigma, size=grid.shape)
        clip = _NOISE_CLIP_SIGMAS * spec.noise_sigma
        velocity = velocity + np.clip(noise, -clip, clip)

    # power: high over the flow region, with mild smooth variation
    p_phase = rng.uniform(0.0, 2.0 * np.pi)
    power = 0.86 + 0.06 * np.cos(3.0 * tt + p_phase) * np.sin(
        2.0 * np.pi * (rr - grid.r_min) / span_r
    )
    power = np.clip(power, 0.75, 0.97)

    cb = int(spec.clutter_band_width)
    if cb > 0:
        clutter = np.zeros(grid.shape, dtype=bool)
        clutter[:, :cb] = True
        clutter[:, -cb:] = True
        clutter[:cb, :] = True
        n_clutter = int(clutter.sum())
        power = np.where(clutter, rng.uniform(0.08, 0.28, size=grid.shape), power)
        tissue = rng.uniform(
            -_CLUTTER_SPEED_FRAC * v_nyquist, _CLUTTER_SPEED_FRAC * v_nyquist,
            size=n_clutter,
        )
        spikes = rng.random(n_clutter) < _SPIKE_FRACTION
        tissue[spikes] = rng.uniform(
            -_SPIKE_SPEED_FRAC * v_nyquist, _SPIKE_SPEED_FRAC * v_nyquist,
            size=int(spikes.sum()),
        )
        velocity[clutter] = tissue

    velocity = velocity.astype(np.float32)
    power = power.astype(np.float32)
    labels = LabelMap(nyquist_number(velocity, v_nyquist))
    wrapped_v = wrap(velocity, v_nyquist)

    alias_free = DopplerFrame(
        grid=grid, velocity=velocity, power=power,
        nyquist_velocity=v_nyquist, wrapped=False,
    )
    wrapped_frame = DopplerFrame(
        grid=grid, velocity=wrapped_v, power=power,
        nyquist_velocity=v_nyquist, wrapped=True,
    )
    return alias_free, wrapped_frame, labels


@dataclass(frozen=True)
class CorpusRanges:
    """Sampling ranges for corpus specs, as fractions of v_nyquist where noted."""

    kinds: tuple[str, ...] = ("inflow_jet", "outflow_jet", "vortex", "mixed")
    clean_peak_frac: tuple[float, float] = (0.35, 0.82)
    aliased_peak_frac: tuple[float, float] = (1.2, 2.1)
    jet_width: tuple[float, float] = (0.14, 0.34)
    noise_sigma_frac: tuple[float, float] = (0.0, 0.02)
    clutter_band_width: tuple[int, int] = (2, 5)


@dataclass(frozen=True)
class GeneratedFrame:
    spec: PhantomSpec
    alias_free: DopplerFrame
    wrapped: DopplerFrame
    labels: LabelMap
    aliased: bool


def generate_corpus(
    n_frames: int,
    aliased_fraction: float = 0.36,
    ranges: CorpusRanges = CorpusRanges(),
    seed: int = 0,
    grid: PolarGrid = DEFAULT_GRID,
    v_nyquist: float = DEFAULT_NYQUIST,
) -> list[GeneratedFrame]:
    """Sample ``n_frames`` phantoms, exactly ``round(fraction * n)`` aliased.

    The default aliased fraction 0.36 mirrors the mix of aliased and
    non-aliased frames in clinical acquisitions.
    """
    if n_frames < 1:
        raise InvalidArgumentError("n_frames must be >= 1")
    if not (0.0 <= aliased_fraction <= 1.0):
        raise InvalidArgumentError("aliased_fraction must lie in [0, 1]")
    master = np.random.default_rng(seed)
    n_aliased = int(round(aliased_fraction * n_frames))
    aliased_idx = set(master.permutation(n_frames)[:n_aliased].tolist())

    out: list[GeneratedFrame] = []
    for i in range(n_frames):
        aliased = i in aliased_idx
        lo, hi = ranges.aliased_peak_frac if aliased else ranges.clean_peak_frac
        spec = PhantomSpec(
            kind=str(master.choice(ranges.kinds)),
            peak_speed=float(master.uniform(lo, hi) * v_nyquist),
            jet_width=float(master.uniform(*ranges.jet_width)),
            jet_center=(
                float(master.uniform(
                    grid.r_min + 0.25 * (grid.r_max - grid.r_min),
                    grid.r_min + 0.75 * (grid.r_max - grid.r_min),
                )),
                float(master.uniform(
                    grid.theta_min + 0.3 * (grid.theta_max - grid.theta_min),
                    grid.theta_min + 0.7 * (grid.theta_max - grid.theta_min),
                )),
            ),
            noise_sigma=float(master.uniform(*ranges.noise_sigma_frac) * v_nyquist),
            clutter_band_width=int(master.integers(
                ranges.clutter_band_width[0], ranges.clutter_band_width[1] + 1
            )),
            seed=int(master.integers(0, 2**63)),
        )
        alias_free, wrapped_frame, labels = generate_frame(spec, grid, v_nyquist)
        if labels.any_aliased() != aliased:
            # sampling ranges guarantee a margin; reaching here is a bug
            raise AssertionError(
                f"frame {i}: aliasing flag {aliased} does not match generated labels"
            )
        out.append(GeneratedFrame(spec, alias_free, wrapped_frame, labels, aliased))
    return out


def save_corpus(directory, corpus: list[GeneratedFrame], seed: int) -> dict:
    """Write wrapped frames + labels as DFF files with a JSON manifest.

    The alias-free reference is not stored separately: it is recoverable
    exactly from the wrapped velocities and the labels.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, gf in enumerate(corpus):
        name = f"frame_{i:05d}.dff"
        dff.write_dff(directory / name, gf.wrapped, gf.labels)
        entries.append({
            "file": name,
            "aliased": gf.aliased,
            "kind": gf.spec.kind,
            "spec": asdict(gf.spec),
        })
    manifest = {
        "format": "echodealias-corpus",
        "version": 1,
        "seed": int(seed),
        "v_nyquist": float(corpus[0].wrapped.nyquist_velocity) if corpus else None,
        "grid": corpus[0].wrapped.grid.to_header() if corpus else None,
        "frames": entries,
    }
    tmp = json.dumps(manifest, sort_keys=True, indent=1)
    dff._atomic_write(directory / "manifest.json", tmp.encode("utf-8"))
    return manifest


def load_corpus(directory) -> tuple[list[DopplerFrame], list[LabelMap], dict]:
    """Read a corpus directory back into wrapped frames + label maps."""
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except OSError as e:
        raise DataFormatError(f"cannot read corpus manifest: {e}") from e
    except json.JSONDecodeError as e:
        raise DataFormatError(f"invalid corpus manifest: {e}") from e
    if manifest.get("format") != "echodealias-corpus":
        raise DataFormatError(f"{manifest_path}: not a corpus manifest")
    frames, labels = [], []
    for entry in manifest["frames"]:
        frame, lab = dff.read_dff(directory / entry["file"])
        if lab is None:
            raise DataFormatError(f"{entry['file']}: corpus frame lacks labels channel")
        frames.append(frame)
        labels.append(lab)
    return frames, labels, manifest
