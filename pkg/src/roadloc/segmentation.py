"""Singular-point detection on gradient sequences and sub-segment construction.

A boundary set ``B`` holds gradient-row indices ``b`` (``1 <= b <= L-2``)
splitting the ``L-1`` gradient rows into half-open segments
``[b_l, b_{l+1})``. The same index is the singular sample: the sub-segment
signal sequences are the closed sample ranges ``[b_l, b_{l+1}]`` so
neighbouring sub-segments share their boundary sample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .signal_model import Position2D, SignalSequence, arc_lengths

EXHAUSTIVE_MAX_ROWS = 25


def _check_boundaries(boundaries, n_rows: int) -> tuple[int, ...]:
    b = tuple(int(v) for v in boundaries)
    if any(v <= u for u, v in zip(b, b[1:])):
        raise ValueError(f"boundaries must be strictly increasing: {b}")
    if b and (b[0] < 1 or b[-1] > n_rows - 1):
        raise ValueError(f"boundaries must lie in [1, {n_rows - 1}]: {b}")
    return b


def _prefix_sums(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    centered = g - g.mean(axis=0)
    zero = np.zeros((1, g.shape[1]))
    s1 = np.concatenate([zero, np.cumsum(centered, axis=0)])
    s2 = np.concatenate([zero, np.cumsum(centered * centered, axis=0)])
    return s1, s2


def segment_cost(g, boundaries) -> float:
    """Sum over segments and BS columns of the within-segment gradient variance.

    Each segment contributes its squared deviations from the segment mean
    divided by the segment length, i.e. the population variance.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    b = (0,) + _check_boundaries(boundaries, g.shape[0]) + (g.shape[0],)
    total = 0.0
    for lo, hi in zip(b, b[1:]):
        seg = g[lo:hi]
        total += float(np.sum((seg - seg.mean(axis=0)) ** 2) / (hi - lo))
    return total


def bottom_up_segment(g, l_min: int = 10, pen: float | None = None,
                      n_segments: int | None = None, criterion: str = "sse") -> tuple[int, ...]:
    """Bottom-up merge segmentation of a gradient matrix.

    Starts from one segment per gradient row and repeatedly merges the
    adjacent pair whose merge raises the segmentation cost the least (leftmost
    on ties). Stops when that increase exceeds ``pen`` (default ``0.25 * K``),
    or, when ``n_segments`` is given, once that many segments remain. Any
    segment shorter than ``l_min`` rows is merged regardless.

    ``criterion="sse"`` scores a segment by its summed squared deviations
    (the numerator of :func:`segment_cost`); merges then never lower the cost,
    so the penalty is a real stopping rule on noisy gradients.
    ``criterion="variance"`` scores by :func:`segment_cost` itself.
    """
    if criterion not in ("sse", "variance"):
        raise ValueError(f"unknown criterion {criterion!r}")
    g = np.asarray(g, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    n_rows, k = g.shape
    if l_min < 1:
        raise ValueError("l_min must be >= 1")
    if n_rows < 2 * l_min:
        raise ValueError(f"sequence too short: {n_rows} gradient rows < 2 * l_min = {2 * l_min}")
    if pen is None:
        pen = 0.25 * k
    s1, s2 = _prefix_sums(g)
    bounds = np.arange(n_rows + 1, dtype=np.int64)
    out = kernels.bottom_up_merge(s1, s2, bounds, int(l_min), float(pen), int(n_segments or 0),
                                  criterion == "variance")
    return tuple(int(v) for v in out[1:-1])


def exhaustive_segment_oracle(g, n_segments: int, l_min: int = 1) -> tuple[int, ...]:
    """Globally cost-minimal boundary set with exactly ``n_segments`` segments.

    Enumerates every placement; ties resolve to the lexicographically smallest
    set. Limited to ``L-1 <= 25`` rows.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.ndim == 1:
        g = g[:, None]
    n_rows = g.shape[0]
    if n_rows > EXHAUSTIVE_MAX_ROWS:
        raise ValueError(f"exhaustive search limited to {EXHAUSTIVE_MAX_ROWS} rows, got {n_rows}")
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    best, best_cost = None, np.inf
    for combo in itertools.combinations(range(1, n_rows), n_segments - 1):
        edges = (0,) + combo + (n_rows,)
        if min(hi - lo for lo, hi in zip(edges, edges[1:])) < l_min:
            continue
        c = segment_cost(g, combo)
        if c < best_cost:
            best, best_cost = combo, c
    if best is None:
        raise ValueError(f"no placement of {n_segments} segments respects l_min={l_min}")
    return best


@dataclass(frozen=True)
class SubSegment:
    road_id: str
    index: int
    start: int
    stop: int  # inclusive sample index
    midpoint: Position2D
    arc_start: float
    arc_stop: float

    @property
    def midpoint_index(self) -> int:
        return (self.start + self.stop + 1) // 2

    @property
    def span(self) -> float:
        return self.arc_stop - self.arc_start

    @property
    def n_samples(self) -> int:
        return self.stop - self.start + 1


def build_subsegments(seq: SignalSequence, boundaries) -> tuple[list[SubSegment], list[SignalSequence]]:
    """Split a road into sub-segments at the singular samples ``boundaries``."""
    b = _check_boundaries(boundaries, seq.length - 1)
    edges = (0,) + b + (seq.length - 1,)
    s = arc_lengths(seq)
    subs, seqs = [], []
    for l, (lo, hi) in enumerate(zip(edges, edges[1:])):
        mid = (lo + hi + 1) // 2
        subs.append(
            SubSegment(seq.road_id, l, lo, hi, Position2D(*map(float, seq.positions[mid])),
                       float(s[lo]), float(s[hi]))
        )
        seqs.append(seq.slice(lo, hi, road_id=f"{seq.road_id}/{l}"))
    return subs, seqs
