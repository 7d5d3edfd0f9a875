"""numba-compiled twins of the kernels in ``_numpy.py``."""

import warnings

import numpy as np
from numba import njit, prange

# an outdated system TBB makes numba fall back to another threading layer; the
# fallback is fine, the warning on every first parallel launch is just noise
warnings.filterwarnings("ignore", message="The TBB threading layer requires")


@njit(cache=True)
def _segment_cost(s1, s2, a, b, normalized):
    m = b - a
    total = 0.0
    for k in range(s1.shape[1]):
        mean = (s1[b, k] - s1[a, k]) / m
        var = (s2[b, k] - s2[a, k]) / m - mean * mean
        if var > 0.0:
            total += var
    return total if normalized else total * m


@njit(cache=True)
def bottom_up_merge(s1, s2, bounds, l_min, pen, n_target, normalized):
    nb = bounds.shape[0]
    b = bounds.copy()
    nseg = nb - 1
    cost = np.empty(nseg)
    for i in range(nseg):
        cost[i] = _segment_cost(s1, s2, b[i], b[i + 1], normalized)
    delta = np.empty(max(nseg - 1, 0))
    for i in range(nseg - 1):
        delta[i] = _segment_cost(s1, s2, b[i], b[i + 2], normalized) - cost[i] - cost[i + 1]
    while nseg > 1:
        best = 0
        for i in range(1, nseg - 1):
            if delta[i] < delta[best]:
                best = i
        any_short = False
        for i in range(nseg):
            if b[i + 1] - b[i] < l_min:
                any_short = True
                break
        if n_target > 0:
            done = nseg <= n_target
        else:
            done = delta[best] > pen
        if done:
            if not any_short:
                break
            best = -1
            for i in range(nseg - 1):
                touches = (b[i + 1] - b[i] < l_min) or (b[i + 2] - b[i + 1] < l_min)
                if touches and (best < 0 or delta[i] < delta[best]):
                    best = i
        merged = _segment_cost(s1, s2, b[best], b[best + 2], normalized)
        # shift arrays left over the removed boundary / segment / pair
        for i in range(best + 1, nseg):
            b[i] = b[i + 1]
        cost[best] = merged
        for i in range(best + 1, nseg - 1):
            cost[i] = cost[i + 1]
        for i in range(best, nseg - 2):
            delta[i] = delta[i + 1]
        nseg -= 1
        if best > 0:
            delta[best - 1] = _segment_cost(s1, s2, b[best - 1], b[best + 1], normalized) - cost[best - 1] - merged
        if best < nseg - 1:
            delta[best] = _segment_cost(s1, s2, b[best], b[best + 2], normalized) - merged - cost[best + 1]
    return b[: nseg + 1].copy()


@njit(cache=True)
def _joint_sums(joint, n_labels):
    """Sum of c*log2(c) over runs of a sorted joint key and of its feature part."""
    sum_f = 0.0
    sum_fl = 0.0
    run_f = 1
    run_fl = 1
    for i in range(1, joint.shape[0]):
        if joint[i] == joint[i - 1]:
            run_fl += 1
        else:
            sum_fl += run_fl * np.log2(run_fl)
            run_fl = 1
        if joint[i] // n_labels == joint[i - 1] // n_labels:
            run_f += 1
        else:
            sum_f += run_f * np.log2(run_f)
            run_f = 1
    sum_fl += run_fl * np.log2(run_fl)
    sum_f += run_f * np.log2(run_f)
    return sum_f, sum_fl


@njit(cache=True)
def _dense_sums(joint, n_keys, n_labels):
    """Same sums as ``_joint_sums`` by counting into a dense table (small key spaces)."""
    table = np.zeros(n_keys * n_labels, dtype=np.int64)
    for j in range(joint.shape[0]):
        table[joint[j]] += 1
    sum_f = 0.0
    sum_fl = 0.0
    for key in range(n_keys):
        row = 0
        for lab in range(n_labels):
            c = table[key * n_labels + lab]
            if c > 0:
                sum_fl += c * np.log2(c)
                row += c
        if row > 0:
            sum_f += row * np.log2(row)
    return sum_f, sum_fl


@njit(cache=True, parallel=True)
def subset_gains(codes, radices, labels, n_labels, subsets):
    n = codes.shape[0]
    counts = np.bincount(labels, minlength=n_labels)
    sum_l = 0.0
    for c in counts:
        if c > 0:
            sum_l += c * np.log2(c)
    h_label = np.log2(n) - sum_l / n
    dense_limit = max(4 * n, 1 << 16)
    out = np.empty(subsets.shape[0])
    for s in prange(subsets.shape[0]):
        joint = np.zeros(n, dtype=np.int64)
        n_keys = 1
        for c in range(subsets.shape[1]):
            col = subsets[s, c]
            r = radices[col]
            n_keys *= r
            for j in range(n):
                joint[j] = joint[j] * r + codes[j, col]
        for j in range(n):
            joint[j] = joint[j] * n_labels + labels[j]
        if n_keys * n_labels <= dense_limit:
            sum_f, sum_fl = _dense_sums(joint, n_keys, n_labels)
        else:
            sum_f, sum_fl = _joint_sums(np.sort(joint), n_labels)
        gain = np.log2(n) + (sum_fl - sum_l - sum_f) / n
        out[s] = min(max(gain, 0.0), h_label)
    return out


@njit(cache=True)
def sliding_features(rsrp, grad, w):
    length, k = rsrp.shape
    if w > length:
        w = length
    out = np.empty((length, 5 * k))
    for j in range(length):
        a = j - w // 2
        if a < 0:
            a = 0
        if a > length - w:
            a = length - w
        for kk in range(k):
            gs = 0.0
            for i in range(a, a + w - 1):
                gs += grad[i, kk]
            s = 0.0
            ds = 0.0
            lo = rsrp[a, kk]
            hi = rsrp[a, kk]
            for i in range(a, a + w):
                v = rsrp[i, kk]
                s += v
                ds += v - rsrp[i, 0]
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
            mean = s / w
            ss = 0.0
            for i in range(a, a + w):
                d = rsrp[i, kk] - mean
                ss += d * d
            out[j, kk] = gs / (w - 1)
            out[j, k + kk] = mean
            out[j, 2 * k + kk] = ss / w
            out[j, 3 * k + kk] = ds / w
            out[j, 4 * k + kk] = hi - lo
    return out


@njit(cache=True, parallel=True)
def shadow_field(points, omega, phase):
    n = points.shape[0]
    m = omega.shape[0]
    scale = np.sqrt(2.0 / m)
    out = np.empty(n)
    for i in prange(n):
        acc = 0.0
        for j in range(m):
            acc += np.cos(points[i, 0] * omega[j, 0] + points[i, 1] * omega[j, 1] + phase[j])
        out[i] = scale * acc
    return out


@njit(cache=True)
def poly_residuals(coeffs, t, o):
    k, d = coeffs.shape
    out = np.empty(t.shape[0])
    for g in range(t.shape[0]):
        acc = 0.0
        for kk in range(k):
            p = 0.0
            for c in range(d - 1, -1, -1):
                p = p * t[g] + coeffs[kk, c]
            r = p - o[kk]
            acc += r * r
        out[g] = acc
    return out


@njit(cache=True)
def scan_residuals(pred, o):
    out = np.empty(pred.shape[0])
    for p in range(pred.shape[0]):
        acc = 0.0
        for kk in range(pred.shape[1]):
            r = pred[p, kk] - o[kk]
            acc += r * r
        out[p] = acc
    return out
