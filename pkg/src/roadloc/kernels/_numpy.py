"""Pure-numpy reference kernels.

Every function here has a twin of the same name and signature in
``_numba.py``; both must return identical values up to float rounding.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _segment_cost(s1, s2, a, b, normalized):
    m = b - a
    mean = (s1[b] - s1[a]) / m
    var = (s2[b] - s2[a]) / m - mean * mean
    total = float(np.sum(np.maximum(var, 0.0)))
    return total if normalized else total * m


def bottom_up_merge(s1, s2, bounds, l_min, pen, n_target, normalized):
    """Greedy adjacent merging over prefix sums.

    ``s1``/``s2`` are ``(n+1, K)`` prefix sums of values and squares; ``bounds``
    holds the initial segment starts followed by ``n``. With ``n_target > 0``
    merging continues until at most that many segments remain, otherwise it
    stops once the cheapest merge costs more than ``pen``. Segments shorter
    than ``l_min`` are always merged away. Ties go to the leftmost pair.
    A segment costs the sum over columns of its variance (``normalized``) or
    of its squared deviations from the mean.
    """
    b = [int(v) for v in bounds]
    cost = [_segment_cost(s1, s2, b[i], b[i + 1], normalized) for i in range(len(b) - 1)]
    delta = [
        _segment_cost(s1, s2, b[i], b[i + 2], normalized) - cost[i] - cost[i + 1] for i in range(len(b) - 2)
    ]
    while len(b) > 2:
        nseg = len(b) - 1
        lengths = np.diff(b)
        d = np.asarray(delta)
        best = int(np.argmin(d))
        short = lengths < l_min
        done = nseg <= n_target if n_target > 0 else d[best] > pen
        if done:
            if not short.any():
                break
            touches = short[:-1] | short[1:]
            masked = np.where(touches, d, np.inf)
            best = int(np.argmin(masked))
        merged = _segment_cost(s1, s2, b[best], b[best + 2], normalized)
        del b[best + 1]
        cost[best] = merged
        del cost[best + 1]
        del delta[best]
        if best > 0:
            delta[best - 1] = _segment_cost(s1, s2, b[best - 1], b[best + 1], normalized) - cost[best - 1] - merged
        if best < len(delta):
            delta[best] = _segment_cost(s1, s2, b[best], b[best + 2], normalized) - merged - cost[best + 1]
    return np.asarray(b, dtype=np.int64)


def _sum_clogc(sorted_rows):
    """Per row, sum of c*log2(c) over run lengths c of a row-sorted 2-D array."""
    r, n = sorted_rows.shape
    flat = sorted_rows.ravel()
    start = np.ones(flat.size, dtype=bool)
    start[1:] = flat[1:] != flat[:-1]
    start[::n] = True
    idx = np.flatnonzero(start)
    counts = np.diff(np.append(idx, flat.size)).astype(np.float64)
    rows = idx // n
    return np.bincount(rows, weights=counts * np.log2(counts), minlength=r)


def subset_gains(codes, radices, labels, n_labels, subsets):
    """Information gain (bits) of ``labels`` given each jointly-binned subset.

    ``codes`` is ``(n, N)`` with column ``j`` in ``[0, radices[j])``;
    ``subsets`` is ``(S, s)`` of column indices. The caller guarantees the
    mixed-radix key times ``n_labels`` fits in int64. One sort of the joint
    (feature, label) key serves both entropy terms: the feature key is the
    joint key divided by ``n_labels``, so it is sorted too.
    """
    n = codes.shape[0]
    counts = np.bincount(labels, minlength=n_labels).astype(np.float64)
    counts = counts[counts > 0]
    sum_l = float(np.sum(counts * np.log2(counts)))
    h_label = np.log2(n) - sum_l / n
    out = np.empty(subsets.shape[0])
    chunk = max(1, 4_000_000 // max(n, 1))
    for lo in range(0, subsets.shape[0], chunk):
        sub = subsets[lo : lo + chunk]
        key = np.zeros((sub.shape[0], n), dtype=np.int64)
        for c in range(sub.shape[1]):
            cols = sub[:, c]
            key = key * radices[cols][:, None] + codes[:, cols].T
        joint = np.sort(key * n_labels + labels[None, :], axis=1)
        sum_fl = _sum_clogc(joint)
        sum_f = _sum_clogc(joint // n_labels)
        gain = np.log2(n) + (sum_fl - sum_l - sum_f) / n
        out[lo : lo + chunk] = np.clip(gain, 0.0, h_label)
    return out


def sliding_features(rsrp, grad, w):
    """Per-sample feature sets over a length-``w`` window centered on each sample.

    Returns ``(L, 5K)`` in the fixed layout (gradient mean, mean, variance,
    difference mean, range). Windows are shifted inward at the road ends.
    """
    length, k = rsrp.shape
    w = min(w, length)
    starts = np.clip(np.arange(length) - w // 2, 0, length - w)
    win = sliding_window_view(rsrp, w, axis=0)[starts]  # (L, K, w)
    gwin = sliding_window_view(grad, w - 1, axis=0)[starts]
    mean = win.mean(axis=2)
    var = win.var(axis=2)
    diff = (win - win[:, :1, :]).mean(axis=2)
    rng = win.max(axis=2) - win.min(axis=2)
    gmean = gwin.mean(axis=2)
    return np.concatenate([gmean, mean, var, diff, rng], axis=1)


def shadow_field(points, omega, phase):
    """Unit-variance sum-of-cosines field evaluated at ``points`` (N, 2)."""
    arg = points @ omega.T + phase[None, :]
    return np.sqrt(2.0 / omega.shape[0]) * np.cos(arg).sum(axis=1)


def poly_residuals(coeffs, t, o):
    """Joint squared residual of ascending-power polynomials at each ``t``."""
    pred = np.zeros((t.size, coeffs.shape[0]))
    for c in range(coeffs.shape[1] - 1, -1, -1):
        pred = pred * t[:, None] + coeffs[:, c][None, :]
    return np.sum((pred - o[None, :]) ** 2, axis=1)


def scan_residuals(pred, o):
    return np.sum((pred - o[None, :]) ** 2, axis=1)
