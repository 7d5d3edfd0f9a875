"""Online two-scale localization against a :class:`RadioMap`.

Stage 1 picks the road whose masked road-scale features are closest to the
vehicle window's feature set. Stage 2 scores the sub-segments of that road by
posterior probability. Stage 3 places the latest signal vector on the chosen
sub-segment's fitted curves.
"""

from __future__ import annotations

import json
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .curvefit import GRID_POINTS, TERNARY_PASSES, locate_on_curve
from .features import feature_set
from .radiomap import RadioMap
from .salient import SelectionMask
from .signal_model import Position2D, SignalSequence, validate_signal_vector

CURVE_POINTS_PER_QUERY = GRID_POINTS + 2 * TERNARY_PASSES + 1


def masked_distance(mask: SelectionMask, e_u, e_ref) -> float:
    idx = list(mask.selected)
    d = np.asarray(e_u, dtype=np.float64)[idx] - np.asarray(e_ref, dtype=np.float64)[idx]
    return float(np.sqrt(np.dot(d, d)))


def road_match_probability(mask: SelectionMask, e_u, e_road) -> float:
    """``exp(-||W e_u - W e_road||)`` for the road's selection mask ``W``."""
    return float(np.exp(-masked_distance(mask, e_u, e_road)))


def posterior_from_distances(distances, priors) -> np.ndarray:
    """Normalize ``prior * exp(-distance)`` over the candidates.

    The road-scale factor multiplies every candidate of the matched road
    equally and cancels; the sum is done in the log domain so large distances
    do not underflow to an all-zero denominator.
    """
    d = np.asarray(distances, dtype=np.float64)
    logits = np.log(np.asarray(priors, dtype=np.float64)) - d
    w = np.exp(logits - logits.max())
    return w / w.sum()


def subsegment_distances(e_u, radio_map: RadioMap, road: int) -> np.ndarray:
    r = radio_map.roads[road]
    return np.array([masked_distance(m, e_u, f) for m, f in zip(r.sub_masks, r.sub_features)])


def subsegment_posterior(e_u, radio_map: RadioMap, road: int) -> np.ndarray:
    """Posterior over the sub-segments of ``road`` given the vehicle features."""
    r = radio_map.roads[road]
    return posterior_from_distances(subsegment_distances(e_u, radio_map, road), r.priors)


@dataclass
class LocalizationResult:
    road_id: str
    road_index: int
    subsegment: int
    posterior: float
    position: Position2D
    road_probabilities: list[float]
    subsegment_posteriors: list[float]
    t: float
    curve_residual: float
    elapsed_ms: float
    feature_comparisons: int
    curve_evaluations: int
    k: int
    extraction_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def work(self) -> int:
        """Scalar feature comparisons plus one K-curve evaluation (the per-point mapping cost)."""
        return self.feature_comparisons + self.k

    def to_json(self) -> str:
        return json.dumps(
            {
                "road_id": self.road_id,
                "subsegment": self.subsegment,
                "posterior": self.posterior,
                "x": self.position.x,
                "y": self.position.y,
                "t": self.t,
                "curve_residual": self.curve_residual,
                "road_probabilities": self.road_probabilities,
                "subsegment_posteriors": self.subsegment_posteriors,
                "elapsed_ms": self.elapsed_ms,
                "extraction_ms": self.extraction_ms,
                "feature_comparisons": self.feature_comparisons,
                "curve_evaluations": self.curve_evaluations,
                **self.extra,
            }
        )


def localize(e_u, o_latest, radio_map: RadioMap) -> LocalizationResult:
    """Road, sub-segment and position for one vehicle window.

    ``e_u`` is the window's feature set and ``o_latest`` its newest signal
    vector. Ties in either argmax resolve to the smallest index.
    """
    e_u = np.asarray(e_u, dtype=np.float64)
    o = validate_signal_vector(o_latest, radio_map.k)
    if e_u.shape != (radio_map.dim,):
        raise ValueError(f"feature set has shape {e_u.shape}, map expects ({radio_map.dim},)")
    t0 = time.perf_counter()
    road_d = np.array([masked_distance(r.mask, e_u, r.features) for r in radio_map.roads])
    road_p = np.exp(-road_d)
    i = int(np.argmin(road_d))
    road = radio_map.roads[i]
    post = subsegment_posterior(e_u, radio_map, i)
    l = int(np.argmax(post))
    t, pos, resid = locate_on_curve(road.curves[l], o)
    elapsed = (time.perf_counter() - t0) * 1e3
    return LocalizationResult(
        road.road_id,
        i,
        l,
        float(post[l]),
        pos,
        road_p.tolist(),
        post.tolist(),
        t,
        resid,
        elapsed,
        radio_map.n_r + road.n_s,
        CURVE_POINTS_PER_QUERY * radio_map.k,
        radio_map.k,
    )


def localize_window(window: SignalSequence, radio_map: RadioMap) -> LocalizationResult:
    """Extract the window's features, then :func:`localize` its newest sample."""
    t0 = time.perf_counter()
    e_u = feature_set(window)
    extraction = (time.perf_counter() - t0) * 1e3
    res = localize(e_u, window.rsrp[-1], radio_map)
    res.extraction_ms = extraction
    return res


def extract_window(signals, spacing, w: int) -> SignalSequence:
    """Newest ``w`` samples with positions rebuilt from odometry spacing.

    ``spacing[j]`` is the distance travelled between samples ``j-1`` and ``j``
    (``spacing[0]`` is ignored). Positions are laid out on the x axis since
    absolute coordinates are unknown online.
    """
    signals = np.asarray(signals, dtype=np.float64)
    spacing = np.asarray(spacing, dtype=np.float64)
    if signals.ndim != 2 or spacing.shape != (signals.shape[0],):
        raise ValueError("need one spacing value per buffered signal vector")
    if w < 2:
        raise ValueError("window must hold at least 2 samples")
    if signals.shape[0] < w:
        raise ValueError(f"buffer holds {signals.shape[0]} samples, window needs {w}")
    sig = signals[-w:]
    steps = spacing[-w:].copy()
    steps[0] = 0.0
    x = np.cumsum(steps)
    return SignalSequence("vehicle", np.column_stack([x, np.zeros(w)]), sig)


class SignalStream:
    """Fixed-capacity buffer of incoming signal vectors and odometry spacing."""

    def __init__(self, capacity: int):
        self._sig: deque = deque(maxlen=capacity)
        self._gap: deque = deque(maxlen=capacity)

    def __len__(self):
        return len(self._sig)

    def push(self, o, spacing: float) -> None:
        self._sig.append(np.asarray(o, dtype=np.float64))
        self._gap.append(float(spacing))

    def window(self, w: int) -> SignalSequence:
        if len(self._sig) == 0:
            raise ValueError(f"buffer holds 0 samples, window needs {w}")
        return extract_window(np.array(self._sig), np.array(self._gap), w)
