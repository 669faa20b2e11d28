"""Training-time augmentation: artificial aliasing, geometric transforms,
and the aliased-frame batch-balancing rule.

Artificial aliasing takes an alias-free frame, re-wraps its velocities at
a randomly reduced Nyquist velocity, and derives the ground-truth label
map on the fly by comparing the field before and after.  Geometric
transforms are exact pixel permutations/replications on the polar grid
(angular shifts and axis flips), so wrap/label consistency survives them
bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, InvalidArgumentError
from .field import DopplerFrame, LabelMap, nyquist_number, wrap


@dataclass(frozen=True)
class AugmentConfig:
    enable_artificial_aliasing: bool = True
    nyquist_shrink_range: tuple[float, float] = (0.5, 0.9)
    velocity_threshold_alpha: float = 0.5
    power_threshold_tau: float = 0.5
    rotation_range: float = 0.12
    flip_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.nyquist_shrink_range
        if not (0.0 < lo < hi < 1.0):
            raise InvalidArgumentError("nyquist_shrink_range needs 0 < low < high < 1")
        for name in ("velocity_threshold_alpha", "power_threshold_tau"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise InvalidArgumentError(f"{name} must lie in (0, 1)")
        if not (0.0 <= self.flip_probability <= 1.0):
            raise InvalidArgumentError("flip_probability must lie in [0, 1]")
        if self.rotation_range < 0.0:
            raise InvalidArgumentError("rotation_range must be >= 0")


def alias_eligible(frame: DopplerFrame, cfg: AugmentConfig) -> bool:
    """True when the frame has a high-velocity, high-power region to wrap."""
    vn = frame.nyquist_velocity
    mask = (np.abs(frame.velocity) > cfg.velocity_threshold_alpha * vn) & (
        frame.power > cfg.power_threshold_tau
    )
    return bool(mask.any())


def artificial_alias(
    frame: DopplerFrame, cfg: AugmentConfig, rng: np.random.Generator
) -> tuple[DopplerFrame, LabelMap] | None:
    """Re-wrap an alias-free frame at a reduced Nyquist velocity.

    Returns the wrapped frame (whose ``nyquist_velocity`` is the reduced
    value) and the on-the-fly ground-truth labels, or ``None`` when the
    frame has no eligible high-velocity region and the caller should skip
    augmenting it.
    """
    vn = frame.nyquist_velocity
    if np.any(nyquist_number(frame.velocity, vn) != 0):
        raise InvalidArgumentError("artificial aliasing needs an alias-free input frame")
    if not alias_eligible(frame, cfg):
        return None
    u = float(rng.uniform(*cfg.nyquist_shrink_range))
    vn_reduced = u * vn
    labels = LabelMap(nyquist_number(frame.velocity, vn_reduced))
    wrapped = wrap(frame.velocity, vn_reduced)
    out = DopplerFrame(
        grid=frame.grid,
        velocity=wrapped,
        power=frame.power,
        nyquist_velocity=vn_reduced,
        wrapped=True,
    )
    return out, labels


@dataclass(frozen=True)
class GeoTransform:
    """An exact polar-grid transform: angular shift plus axis flips."""

    angular_shift: int = 0
    flip_radial: bool = False
    flip_angular: bool = False

    def apply(self, raster: np.ndarray) -> np.ndarray:
        out = raster
        if self.angular_shift != 0:
            k = self.angular_shift
            shifted = np.empty_like(out)
            if k > 0:
                shifted[:, k:] = out[:, :-k]
                shifted[:, :k] = out[:, :1]
            else:
                shifted[:, :k] = out[:, -k:]
                shifted[:, k:] = out[:, -1:]
            out = shifted
        if self.flip_radial:
            out = out[::-1, :]
        if self.flip_angular:
            out = out[:, ::-1]
        return np.ascontiguousarray(out)

    @property
    def is_identity(self) -> bool:
        return self.angular_shift == 0 and not self.flip_radial and not self.flip_angular


def sample_geo_transform(
    cfg: AugmentConfig, frame: DopplerFrame, rng: np.random.Generator
) -> GeoTransform:
    """Draw a transform: rotation becomes an integer beam-index shift."""
    grid = frame.grid
    dtheta = (grid.theta_max - grid.theta_min) / (grid.n_angular - 1)
    rot = rng.uniform(-cfg.rotation_range, cfg.rotation_range) if cfg.rotation_range else 0.0
    max_shift = grid.n_angular - 1
    shift = int(np.clip(round(rot / dtheta), -max_shift, max_shift))
    return GeoTransform(
        angular_shift=shift,
        flip_radial=bool(rng.random() < cfg.flip_probability),
        flip_angular=bool(rng.random() < cfg.flip_probability),
    )


def geometric_augment(
    frame: DopplerFrame,
    labels: LabelMap,
    cfg: AugmentConfig,
    rng: np.random.Generator,
) -> tuple[DopplerFrame, LabelMap]:
    """Apply one sampled transform identically to velocity, power and labels.

    An angular mirror is a pure image flip: the velocity sign is kept,
    and labels move with their pixels, so the wrap/label relation is
    preserved exactly.
    """
    if labels.shape != frame.shape:
        raise InvalidArgumentError("label shape does not match frame shape")
    t = sample_geo_transform(cfg, frame, rng)
    if t.is_identity:
        return frame, labels
    new_frame = replace(
        frame,
        velocity=t.apply(frame.velocity),
        power=t.apply(frame.power),
    )
    return new_frame, LabelMap(t.apply(labels.labels))


@dataclass(frozen=True)
class BatchItem:
    """One slot of a training batch."""

    index: int
    artificially_alias: bool = False


def balanced_batches(
    aliased_flags,
    batch_size: int,
    rng: np.random.Generator,
    augmentable_flags=None,
) -> list[list[BatchItem]]:
    """Partition one epoch into batches that each hold >= 1 aliased frame.

    Starts from a random permutation and repairs deficient batches by
    swapping against batches with spare aliased frames.  When aliased
    frames are too scarce to cover every batch, a deficient batch either
    gets one eligible member marked for on-the-fly artificial aliasing,
    or receives a duplicated aliased frame; members displaced by
    duplication are re-emitted in trailing batches so every frame still
    appears at least once per epoch.
    """
    aliased = np.asarray(aliased_flags, dtype=bool)
    n = aliased.size
    if n == 0:
        raise ConfigError("empty corpus")
    if batch_size < 1:
        raise InvalidArgumentError("batch_size must be >= 1")
    augmentable = (
        np.zeros(n, dtype=bool)
        if augmentable_flags is None
        else np.asarray(augmentable_flags, dtype=bool)
    )
    if not aliased.any() and not augmentable.any():
        raise ConfigError(
            "corpus has no aliased frames and artificial aliasing is disabled"
        )

    perm = rng.permutation(n)
    batches: list[list[BatchItem]] = [
        [BatchItem(int(i)) for i in perm[s : s + batch_size]]
        for s in range(0, n, batch_size)
    ]

    def has_aliased(batch):
        return any(aliased[it.index] or it.artificially_alias for it in batch)

    # pass 1: swap spare aliased members into deficient batches
    for bi, batch in enumerate(batches):
        if has_aliased(batch):
            continue
        done = False
        for bj, donor in enumerate(batches):
            if bj == bi:
                continue
            spare = [k for k, it in enumerate(donor) if aliased[it.index]]
            if len(spare) >= 2:
                k = spare[0]
                batch[0], donor[k] = donor[k], batch[0]
                done = True
                break
        if done:
            continue
        # pass 2: mark an eligible member for artificial aliasing
        eligible = [k for k, it in enumerate(batch) if augmentable[it.index]]
        if eligible:
            k = eligible[int(rng.integers(len(eligible)))]
            batch[k] = BatchItem(batch[k].index, artificially_alias=True)

    # pass 3: duplicate an aliased frame into batches still deficient
    displaced: list[BatchItem] = []
    aliased_pool = np.flatnonzero(aliased)
    for batch in batches:
        if has_aliased(batch):
            continue
        if aliased_pool.size == 0:
            raise ConfigError(
                "cannot balance batches: no aliased frames and no augmentable frames"
            )
        dup = int(aliased_pool[int(rng.integers(aliased_pool.size))])
        victim = int(rng.integers(len(batch)))
        displaced.append(batch[victim])
        batch[victim] = BatchItem(dup)

    # re-emit displaced members so nothing starves this epoch
    while displaced:
        chunk, displaced = displaced[: batch_size - 1], displaced[batch_size - 1 :]
        if not any(aliased[it.index] or it.artificially_alias for it in chunk):
            dup = int(aliased_pool[int(rng.integers(aliased_pool.size))])
            chunk.append(BatchItem(dup))
        batches.append(chunk)
    return batches
