"""Region-merging baseline dealiaser.

Segments the wrapped velocity raster by statistical region merging (a
union-find sweep over neighbor pairs in ascending velocity-difference
order, merging when region means pass a Hoeffding-style bound), then
propagates wrap counts outward from the largest segment under the
assumption that it is alias-free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidArgumentError
from .field import DopplerFrame, LabelMap, unwrap_with_labels


@dataclass(frozen=True)
class DeanParams:
    """Baseline hyperparameters.

    ``q`` controls merging granularity (larger q merges less, yielding
    more segments); ``power_floor`` excludes low-power segments from
    dealiasing decisions, leaving noise unchanged.
    """

    q: float = 10.0
    power_floor: float = 0.3

    def __post_init__(self):
        if not (self.q > 0):
            raise InvalidArgumentError("q must be positive")
        if not (0.0 <= self.power_floor <= 1.0):
            raise InvalidArgumentError("power_floor must lie in [0, 1]")


@dataclass(frozen=True)
class SegmentGraph:
    """Segmentation result: a partition of the raster plus per-segment stats.

    Segment ids are consecutive integers starting at 0, numbered by first
    occurrence in raster-scan order.
    """

    segment_id: np.ndarray
    pixel_count: np.ndarray
    mean_velocity: np.ndarray
    mean_power: np.ndarray
    adjacency: frozenset

    @property
    def n_segments(self) -> int:
        return self.pixel_count.size

    def neighbors(self, s: int) -> list[int]:
        out = set()
        for a, b in self.adjacency:
            if a == s:
                out.add(b)
            elif b == s:
                out.add(a)
        return sorted(out)


class _UnionFind:
    """Array-based union-find with size tracking and path compression."""

    def __init__(self, n: int):
        self.parent = np.arange(n, dtype=np.int64)
        self.size = np.ones(n, dtype=np.int64)

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, ra: int, rb: int) -> int:
        """Merge two roots (must differ); returns the surviving root."""
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra


def _neighbor_edges(shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
    """4-connectivity neighbor pairs as flat index arrays (a, b) with a < b."""
    h, w = shape
    idx = np.arange(h * w).reshape(h, w)
    horiz = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vert = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    edges = np.concatenate([horiz, vert], axis=0)
    return edges[:, 0], edges[:, 1]


def srm_segment(frame: DopplerFrame, params: DeanParams = DeanParams()) -> SegmentGraph:
    """Segment the velocity raster by statistical region merging.

    Two regions merge when the difference of their mean velocities does
    not exceed ``sqrt(b(R1)^2 + b(R2)^2)`` with
    ``b(R) = g * sqrt(ln(6/delta) / (2 q |R|))``, ``g = 2 v_nyquist`` and
    ``delta = 1 / (6 n^2)`` for an n-pixel raster.  Pixel pairs are
    processed in ascending order of absolute velocity difference, ties
    broken by pixel index, so the result is deterministic.
    """
    v = frame.velocity.astype(np.float64).ravel()
    n = v.size
    ea, eb = _neighbor_edges(frame.shape)
    diffs = np.abs(v[ea] - v[eb])
    order = np.lexsort((eb, ea, diffs))
    ea, eb = ea[order], eb[order]

    g = 2.0 * float(frame.nyquist_velocity)
    delta = 1.0 / (6.0 * n * n)
    # b(R)^2 = coeff / |R|
    coeff = g * g * np.log(6.0 / delta) / (2.0 * float(params.q))

    uf = _UnionFind(n)
    vsum = v.copy()
    size = uf.size
    for a, b in zip(ea.tolist(), eb.tolist()):
        ra = uf.find(a)
        rb = uf.find(b)
        if ra == rb:
            continue
        na, nb = size[ra], size[rb]
        mean_a = vsum[ra] / na
        mean_b = vsum[rb] / nb
        thresh_sq = coeff * (1.0 / na + 1.0 / nb)
        d = mean_a - mean_b
        if d * d <= thresh_sq:
            root = uf.union(ra, rb)
            vsum[root] = vsum[ra] + vsum[rb]

    roots = np.fromiter((uf.find(i) for i in range(n)), dtype=np.int64, count=n)
    # consecutive ids in raster-scan first-occurrence order
    unique_roots, seg_flat = np.unique(roots, return_inverse=True)
    first_pos = np.full(unique_roots.size, n, dtype=np.int64)
    np.minimum.at(first_pos, seg_flat, np.arange(n))
    rank = np.empty(unique_roots.size, dtype=np.int64)
    rank[np.argsort(first_pos)] = np.arange(unique_roots.size)
    seg_flat = rank[seg_flat]

    k = unique_roots.size
    counts = np.bincount(seg_flat, minlength=k)
    mean_vel = np.bincount(seg_flat, weights=v, minlength=k) / counts
    mean_pow = (
        np.bincount(seg_flat, weights=frame.power.astype(np.float64).ravel(), minlength=k)
        / counts
    )
    sa, sb = seg_flat[ea], seg_flat[eb]
    cross = sa != sb
    pairs = np.stack(
        [np.minimum(sa[cross], sb[cross]), np.maximum(sa[cross], sb[cross])], axis=1
    )
    adjacency = frozenset(map(tuple, np.unique(pairs, axis=0).tolist()))

    return SegmentGraph(
        segment_id=seg_flat.reshape(frame.shape).astype(np.int32),
        pixel_count=counts,
        mean_velocity=mean_vel,
        mean_power=mean_pow,
        adjacency=adjacency,
    )


class DeanResult(NamedTuple):
    labels: LabelMap
    frame: DopplerFrame
    unreachable_segments: tuple[int, ...]


def dean_dealias(
    frame: DopplerFrame, params: DeanParams = DeanParams()
) -> DeanResult:
    """Dealias one frame by segment-wise wrap-count propagation.

    The largest segment is assumed alias-free (label 0).  Remaining
    segments are visited in decreasing size order; a segment adjacent to
    already-labeled segments gets the wrap count in {-1, 0, +1} that
    minimizes the absolute mean velocity jump across the shared boundary,
    and is only considered aliased when the best correction improves the
    raw jump by more than the Nyquist velocity.  Segments whose mean
    power is below ``power_floor`` are treated as noise: forced to label
    0 and ignored as propagation anchors.  Segments unreachable from the
    largest one are labeled 0 and reported.
    """
    seg = srm_segment(frame, params)
    k = seg.n_segments
    vn = float(frame.nyquist_velocity)
    v = frame.velocity.astype(np.float64).ravel()
    seg_flat = seg.segment_id.ravel()

    ea, eb = _neighbor_edges(frame.shape)
    sa, sb = seg_flat[ea], seg_flat[eb]
    cross = sa != sb
    ea, eb, sa, sb = ea[cross], eb[cross], sa[cross], sb[cross]

    # boundary edges touching each segment
    edges_of: list[list[int]] = [[] for _ in range(k)]
    for ei in range(sa.size):
        edges_of[sa[ei]].append(ei)
        edges_of[sb[ei]].append(ei)

    labels_seg = np.zeros(k, dtype=np.int8)
    decided = np.zeros(k, dtype=bool)
    excluded = seg.mean_power < params.power_floor

    # noise segments: label 0, never used as anchors
    decided[excluded] = True

    order = sorted(range(k), key=lambda s: (-int(seg.pixel_count[s]), s))
    largest = order[0]
    if not decided[largest]:
        decided[largest] = True  # anchor, label 0

    def anchor(s: int) -> bool:
        return decided[s] and not excluded[s]

    pending = [s for s in order if not decided[s]]
    while pending:
        progressed = False
        still = []
        for s in pending:
            num = 0.0
            cnt = 0
            for ei in edges_of[s]:
                if sa[ei] == s:
                    other, ps, po = sb[ei], ea[ei], eb[ei]
                else:
                    other, ps, po = sa[ei], eb[ei], ea[ei]
                if not anchor(other):
                    continue
                corrected = v[po] + 2.0 * labels_seg[other] * vn
                num += v[ps] - corrected
                cnt += 1
            if cnt == 0:
                still.append(s)
                continue
            signed = num / cnt
            raw = abs(signed)
            jumps = {l: abs(signed + 2.0 * l * vn) for l in (-1, 0, 1)}
            best = min(jumps, key=lambda l: (jumps[l], abs(l)))
            if best != 0 and raw - jumps[best] > vn:
                labels_seg[s] = best
            decided[s] = True
            progressed = True
        if not progressed:
            break
        pending = still

    unreachable = tuple(s for s in pending)
    if unreachable:
        warnings.warn(
            f"{len(unreachable)} segment(s) unreachable from the largest segment; "
            "labeled 0",
            RuntimeWarning,
            stacklevel=2,
        )

    labels = LabelMap(labels_seg[seg_flat].reshape(frame.shape))
    dealiased = DopplerFrame(
        grid=frame.grid,
        velocity=unwrap_with_labels(frame.velocity, labels, vn),
        power=frame.power,
        nyquist_velocity=vn,
        wrapped=False,
    )
    return DeanResult(labels, dealiased, unreachable)
