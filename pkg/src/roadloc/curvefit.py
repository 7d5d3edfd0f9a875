"""Per-sub-segment RSRP curves over normalized arc length, and their inversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .signal_model import Position2D, SignalSequence, arc_lengths

GRID_POINTS = 1001
TERNARY_PASSES = 3


@dataclass(frozen=True, eq=False)
class SubSegmentCurves:
    """Ascending-power coefficients per BS over ``t in [0, 1]``.

    ``knots_t`` / ``knots_xy`` map normalized arc length back to positions by
    piecewise-linear interpolation.
    """

    degree: int
    coeffs: np.ndarray  # (K, degree + 1)
    residual_rms: np.ndarray  # (K,)
    knots_t: np.ndarray
    knots_xy: np.ndarray  # (n_knots, 2)
    arc_length: float

    @property
    def k(self) -> int:
        return self.coeffs.shape[0]

    def evaluate(self, t) -> np.ndarray:
        """RSRP predicted by every BS curve at ``t``; shape ``(len(t), K)``."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return np.polynomial.polynomial.polyval(t, self.coeffs.T).T

    def position(self, t: float) -> Position2D:
        x = np.interp(t, self.knots_t, self.knots_xy[:, 0])
        y = np.interp(t, self.knots_t, self.knots_xy[:, 1])
        return Position2D(float(x), float(y))

    def residual(self, t, o) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        return kernels.poly_residuals(self.coeffs, t, np.asarray(o, dtype=np.float64))


def fit_curves(seq: SignalSequence, degree: int = 3) -> SubSegmentCurves:
    """Least-squares polynomial of RSRP against normalized arc length, per BS."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if seq.length < degree + 1:
        raise ValueError(f"{seq.length} samples cannot determine a degree-{degree} fit")
    s = arc_lengths(seq)
    span = s[-1]
    if span <= 0:
        raise ValueError("rank deficient fit: all samples share one arc length")
    t = s / span
    vander = np.vander(t, degree + 1, increasing=True)
    coeffs, _, rank, _ = np.linalg.lstsq(vander, seq.rsrp, rcond=None)
    if rank < degree + 1:
        raise ValueError(f"rank deficient fit (rank {rank} < {degree + 1})")
    resid = vander @ coeffs - seq.rsrp
    rms = np.sqrt(np.mean(resid**2, axis=0))
    return SubSegmentCurves(degree, np.ascontiguousarray(coeffs.T), rms, t, seq.positions.copy(), float(span))


def locate_on_curve(curves: SubSegmentCurves, o) -> tuple[float, Position2D, float]:
    """Normalized arc length minimizing the joint RSRP residual against ``o``.

    A 1001-point grid picks the best cell (smallest ``t`` on exact ties);
    three ternary-search passes over the neighbouring interval refine it, and
    the refinement is kept only if it strictly improves the residual.
    """
    o = np.asarray(o, dtype=np.float64)
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    res = kernels.poly_residuals(curves.coeffs, grid, o)
    i = int(np.argmin(res))
    best_t, best_r = float(grid[i]), float(res[i])
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, GRID_POINTS - 1)]
    for _ in range(TERNARY_PASSES):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        r1, r2 = kernels.poly_residuals(curves.coeffs, np.array([m1, m2]), o)
        if r1 <= r2:
            hi = m2
        else:
            lo = m1
    mid = 0.5 * (lo + hi)
    r_mid = float(kernels.poly_residuals(curves.coeffs, np.array([mid]), o)[0])
    if r_mid < best_r:
        best_t, best_r = mid, r_mid
    return best_t, curves.position(best_t), best_r
