"""Gradient, difference and statistical features of a signal sequence.

A feature set has ``q * K`` entries (``q = 5``) laid out by kind, each kind
holding one value per BS::

    [grad_mean_0..K-1, mean_0..K-1, variance_0..K-1, diff_mean_0..K-1, range_0..K-1]
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .signal_model import SignalSequence

FEATURE_KINDS = ("grad_mean", "mean", "variance", "diff_mean", "range")
Q = len(FEATURE_KINDS)
LAYOUT_VERSION = 1


def feature_names(k: int) -> list[str]:
    return [f"{kind}_{b}" for kind in FEATURE_KINDS for b in range(k)]


def feature_kind(index: int, k: int) -> str:
    return FEATURE_KINDS[index // k]


def gradients(seq: SignalSequence) -> np.ndarray:
    """``(L-1, K)`` RSRP change per meter between consecutive samples (dB/m)."""
    pos = seq.positions
    step = np.hypot(*np.diff(pos, axis=0).T)
    zero = np.flatnonzero(step <= 0.0)
    if zero.size:
        raise ValueError(f"coincident consecutive positions at index {zero[0]}")
    return np.diff(seq.rsrp, axis=0) / step[:, None]


def differences(o) -> np.ndarray:
    """RSRP of every BS relative to the MBS (column 0)."""
    o = np.asarray(o, dtype=np.float64)
    return o - o[..., :1]


def feature_set(seq: SignalSequence) -> np.ndarray:
    g = gradients(seq)
    p = seq.rsrp
    return np.concatenate(
        [
            g.mean(axis=0),
            p.mean(axis=0),
            p.var(axis=0),
            differences(p).mean(axis=0),
            p.max(axis=0) - p.min(axis=0),
        ]
    )


def sample_features(seq: SignalSequence, window: int) -> np.ndarray:
    """Feature set of a ``window``-sample neighbourhood around every sample, ``(L, 5K)``.

    Used as the per-sample distribution when ranking features by information
    gain; the window is centered and shifted inward at the ends.
    """
    if window < 2:
        raise ValueError("window must cover at least 2 samples")
    return kernels.sliding_features(seq.rsrp, gradients(seq), int(window))
