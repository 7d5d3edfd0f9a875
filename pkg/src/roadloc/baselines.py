"""Comparison localizers over a uniform-grid fingerprint database.

* RWKNN: k nearest cells by RSRP distance, restricted to cells whose strongest
  BS matches the query's, inverse-distance weighted.
* GIFT: nearest cell by windowed signal gradient.
* CF-ELS: per-road log-distance fits searched exhaustively along every road.

Every locate function returns ``(Position2D, evaluated)``, where
``evaluated`` counts the candidate cells or grid points compared against the
query.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .features import gradients
from .signal_model import Position2D, Scenario, SignalSequence, arc_lengths, validate_signal_vector

EPS = 1e-6


def trailing_gradient(seq: SignalSequence, window: int) -> np.ndarray:
    """Mean gradient over the ``window`` samples ending at each sample, ``(L, K)``.

    Near the start of the road the window is shortened to what is available.
    """
    g = gradients(seq)
    c = np.vstack([np.zeros((1, g.shape[1])), np.cumsum(g, axis=0)])
    j = np.arange(seq.length)
    lo = np.maximum(j - (window - 1), 0)
    hi = np.maximum(j, 1)
    lo = np.minimum(lo, hi - 1)
    return (c[hi] - c[lo]) / (hi - lo)[:, None]


@dataclass(frozen=True)
class GridFingerprintDB:
    grid_size: float
    origin: tuple[float, float]
    cells: np.ndarray  # (C, 2) integer cell indices
    centers: np.ndarray  # (C, 2)
    rsrp: np.ndarray  # (C, K) mean RSRP
    gradient: np.ndarray  # (C, K) mean trailing-window gradient
    strongest: np.ndarray  # (C,) argmax of mean RSRP
    counts: np.ndarray  # samples per cell
    window: int

    @property
    def k(self) -> int:
        return self.rsrp.shape[1]

    def __len__(self):
        return self.centers.shape[0]

    @classmethod
    def build(cls, scenario: Scenario, grid_size: float, window: int = 10) -> "GridFingerprintDB":
        """Average every road sample into the square cell that contains it.

        Cells tile the bounding box of the samples starting at its lower-left
        corner; only occupied cells are kept.
        """
        if grid_size <= 0:
            raise ValueError("grid size must be positive")
        pos = np.vstack([r.positions for r in scenario.roads])
        sig = np.vstack([r.rsrp for r in scenario.roads])
        grad = np.vstack([trailing_gradient(r, window) for r in scenario.roads])
        origin = pos.min(axis=0)
        idx = np.floor((pos - origin) / grid_size).astype(np.int64)
        cells, inverse, counts = np.unique(idx, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.ravel()
        n = cells.shape[0]

        def cell_mean(a):
            out = np.zeros((n, a.shape[1]))
            np.add.at(out, inverse, a)
            return out / counts[:, None]

        mean_rsrp = cell_mean(sig)
        return cls(
            float(grid_size),
            (float(origin[0]), float(origin[1])),
            cells,
            origin + (cells + 0.5) * grid_size,
            mean_rsrp,
            cell_mean(grad),
            np.argmax(mean_rsrp, axis=1),
            counts,
            int(window),
        )


def _weighted_centroid(centers, d) -> Position2D:
    w = 1.0 / (d + EPS)
    xy = (centers * w[:, None]).sum(axis=0) / w.sum()
    return Position2D(float(xy[0]), float(xy[1]))


def rwknn_locate(db: GridFingerprintDB, o, k: int = 3) -> tuple[Position2D, int]:
    """Restricted weighted k-nearest-neighbour fix for one signal vector."""
    if len(db) == 0:
        raise ValueError("fingerprint database is empty")
    o = validate_signal_vector(o, db.k)
    cand = np.flatnonzero(db.strongest == int(np.argmax(o)))
    if cand.size == 0:
        cand = np.arange(len(db))
    d = np.sqrt(np.sum((db.rsrp[cand] - o) ** 2, axis=1))
    order = np.argsort(d, kind="stable")[:k]
    return _weighted_centroid(db.centers[cand[order]], d[order]), int(cand.size)


def gift_locate(db: GridFingerprintDB, window: SignalSequence) -> tuple[Position2D, int]:
    """Cell whose gradient fingerprint is nearest the window's recent gradient."""
    if len(db) == 0:
        raise ValueError("fingerprint database is empty")
    if window.k != db.k:
        raise ValueError(f"window has K={window.k}, database K={db.k}")
    q = trailing_gradient(window, db.window)[-1]
    d = np.sum((db.gradient - q) ** 2, axis=1)
    best = int(np.argmin(d))
    c = db.centers[best]
    return Position2D(float(c[0]), float(c[1])), len(db)


@dataclass(frozen=True)
class RoadFit:
    road_id: str
    intercept: np.ndarray  # (K,)
    slope: np.ndarray  # (K,) dB per decade of distance
    arc: np.ndarray  # search grid arc lengths
    xy: np.ndarray  # (P, 2) positions on the grid
    predicted: np.ndarray  # (P, K)


@dataclass(frozen=True)
class CurveFitModel:
    roads: tuple[RoadFit, ...]
    step: float
    k: int

    @property
    def n_points(self) -> int:
        return sum(r.arc.size for r in self.roads)

    @classmethod
    def build(cls, scenario: Scenario, step: float = 0.1) -> "CurveFitModel":
        """Fit ``a_k + b_k log10(d_k)`` per road and BS, then tabulate each road at ``step``."""
        if step <= 0:
            raise ValueError("search step must be positive")
        if scenario.bs_positions.shape[0] != scenario.k:
            raise ValueError("CF-ELS needs the BS positions")
        bs = scenario.bs_positions
        fits = []
        for r in sorted(scenario.roads, key=lambda s: s.road_id):
            s = arc_lengths(r)
            logd = _log_distance(r.positions, bs)
            a, b = np.empty(scenario.k), np.empty(scenario.k)
            for k in range(scenario.k):
                design = np.column_stack([np.ones(r.length), logd[:, k]])
                (a[k], b[k]), *_ = np.linalg.lstsq(design, r.rsrp[:, k], rcond=None)
            n = math.ceil(s[-1] / step) + 1
            grid = np.minimum(np.arange(n) * step, s[-1])
            xy = np.column_stack([np.interp(grid, s, r.positions[:, 0]), np.interp(grid, s, r.positions[:, 1])])
            pred = a + b * _log_distance(xy, bs)
            fits.append(RoadFit(r.road_id, a, b, grid, xy, pred))
        return cls(tuple(fits), float(step), scenario.k)


def _log_distance(points, bs) -> np.ndarray:
    d = np.hypot(points[:, None, 0] - bs[None, :, 0], points[:, None, 1] - bs[None, :, 1])
    return np.log10(np.maximum(d, 0.5))


def cfels_locate(model: CurveFitModel, o) -> tuple[Position2D, int]:
    """Grid point of least joint squared residual over all roads (ties: smaller road id)."""
    o = validate_signal_vector(o, model.k)
    best, best_cost = None, np.inf
    for r in model.roads:
        res = kernels.scan_residuals(r.predicted, o)
        j = int(np.argmin(res))
        if res[j] < best_cost:
            best, best_cost = r.xy[j], res[j]
    return Position2D(float(best[0]), float(best[1])), model.n_points
