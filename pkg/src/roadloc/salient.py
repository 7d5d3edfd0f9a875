"""Salient feature selection by information gain and sparse masking.

Each selection context (all roads, or the sub-segments of one road) gets a
single mask chosen by exhaustive search over feature subsets of size up to
``f_max``. The per-sample feature distribution is the feature set of a small
window around every sample, labelled by the entity (road or sub-segment) the
sample belongs to. Subsets are discretized jointly into tuples of histogram
bins; the plug-in information gain of the labels given that tuple is the
score.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .features import FEATURE_KINDS, Q, feature_set, sample_features
from .signal_model import Scenario

GAIN_TIE_TOL = 1e-12
_KEY_LIMIT = 2**62


def discretize(values, bin_width: float) -> dict[int, int]:
    """Histogram of ``floor(value / bin_width)`` bin indices."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    bins = np.floor(np.asarray(values, dtype=np.float64) / bin_width).astype(np.int64)
    return dict(Counter(int(b) for b in bins.ravel()))


def entropy(hist: Mapping) -> float:
    """Shannon entropy in bits of a histogram (bin -> count)."""
    counts = np.array([c for c in hist.values() if c > 0], dtype=np.float64)
    if counts.size == 0:
        raise ValueError("entropy of an empty histogram")
    p = counts / counts.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))


def _bin_codes(values: np.ndarray, widths: np.ndarray) -> np.ndarray:
    return np.floor(values / widths).astype(np.int64)


def information_gain(labels, feature_values, bin_width) -> float:
    """``H(label) - H(label | binned features)`` in bits.

    ``feature_values`` may be one column per sample or an ``(n, s)`` array
    whose columns are binned jointly (``bin_width`` scalar or per column).
    """
    labels = list(labels)
    values = np.asarray(feature_values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[0] != len(labels):
        raise ValueError("labels and feature values differ in length")
    if len(set(labels)) < 2:
        raise ValueError("information gain needs at least two distinct labels")
    widths = np.broadcast_to(np.asarray(bin_width, dtype=np.float64), (values.shape[1],))
    if np.any(widths <= 0):
        raise ValueError("bin_width must be positive")
    cells = [tuple(row) for row in _bin_codes(values, widths)]
    n = len(labels)
    by_cell: dict[tuple, Counter] = {}
    for cell, lab in zip(cells, labels):
        by_cell.setdefault(cell, Counter())[lab] += 1
    h_label = entropy(Counter(labels))
    h_cond = sum(sum(c.values()) / n * entropy(c) for c in by_cell.values())
    return float(min(max(h_label - h_cond, 0.0), h_label))


@dataclass(frozen=True)
class SelectionMask:
    selected: tuple[int, ...]
    dim: int

    def __post_init__(self):
        sel = tuple(sorted(int(i) for i in self.selected))
        if len(set(sel)) != len(sel):
            raise ValueError("mask indices must be unique")
        if not sel:
            raise ValueError("mask must select at least one feature")
        if sel[0] < 0 or sel[-1] >= self.dim:
            raise ValueError(f"mask indices must lie in [0, {self.dim})")
        object.__setattr__(self, "selected", sel)

    def __len__(self):
        return len(self.selected)

    def vector(self) -> np.ndarray:
        w = np.zeros(self.dim)
        w[list(self.selected)] = 1.0
        return w


def apply_mask(mask: SelectionMask, e) -> np.ndarray:
    e = np.asarray(e, dtype=np.float64)
    if e.shape[-1] != mask.dim:
        raise ValueError(f"feature vector has dim {e.shape[-1]}, mask dim {mask.dim}")
    out = np.zeros_like(e)
    idx = list(mask.selected)
    out[..., idx] = e[..., idx]
    return out


def bin_widths_for(k: int, rsrp_width: float, gradient_width: float) -> np.ndarray:
    return np.array(
        [gradient_width if kind == "grad_mean" else rsrp_width for kind in FEATURE_KINDS for _ in range(k)]
    )


def _dense(labels) -> tuple[np.ndarray, int]:
    _, inv = np.unique(np.asarray(labels), return_inverse=True)
    inv = inv.astype(np.int64).ravel()
    return inv, int(inv.max()) + 1


def _gains(codes, radices, labels, n_labels, subsets: np.ndarray) -> np.ndarray:
    log_limit = math.log2(_KEY_LIMIT) - math.log2(max(n_labels, 1))
    log_r = np.log2(radices.astype(np.float64))
    fits = log_r[subsets].sum(axis=1) < log_limit
    out = np.empty(subsets.shape[0])
    if fits.any():
        out[fits] = kernels.subset_gains(codes, radices, labels, n_labels, np.ascontiguousarray(subsets[fits]))
    for s in np.flatnonzero(~fits):
        # mixed-radix key would overflow: re-encode the joint cells densely
        _, inv = np.unique(codes[:, subsets[s]], axis=0, return_inverse=True)
        inv = inv.astype(np.int64).ravel()
        one = np.ascontiguousarray(inv[:, None])
        out[s] = kernels.subset_gains(one, np.array([inv.max() + 1]), labels, n_labels,
                                      np.zeros((1, 1), dtype=np.int64))[0]
    return out


@dataclass
class Selection:
    mask: SelectionMask
    gain: float
    degenerate: bool = False
    evaluated: int = 0


def select_salient(sample_values, labels, f_max: int, bin_width) -> Selection:
    """Exhaustive search for the feature subset with maximal information gain.

    Subsets of every size up to ``f_max`` are scored; ties (within 1e-12
    bits) go to the smaller subset, then to the lexicographically first. With
    a single label, gain is undefined and the ``f_max`` features of largest
    per-sample variance are returned instead (``degenerate=True``).
    """
    x = np.asarray(sample_values, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("sample_values must be (n_samples, n_features)")
    n, dim = x.shape
    f_max = int(min(f_max, dim))
    if f_max < 1:
        raise ValueError("f_max must be >= 1")
    widths = np.broadcast_to(np.asarray(bin_width, dtype=np.float64), (dim,))
    lab, n_labels = _dense(labels)
    if lab.size != n:
        raise ValueError("labels and sample values differ in length")
    if n_labels < 2:
        var = x.var(axis=0)
        order = sorted(range(dim), key=lambda i: (-var[i], i))
        return Selection(SelectionMask(tuple(order[:f_max]), dim), 0.0, degenerate=True)

    raw = _bin_codes(x, widths)
    codes = np.empty_like(raw)
    radices = np.empty(dim, dtype=np.int64)
    for j in range(dim):
        _, inv = np.unique(raw[:, j], return_inverse=True)
        codes[:, j] = inv.ravel()
        radices[j] = inv.max() + 1
    codes = np.ascontiguousarray(codes)

    best_gain, best_subset, evaluated = -np.inf, None, 0
    for size in range(1, f_max + 1):
        subsets = np.array(list(itertools.combinations(range(dim), size)), dtype=np.int64)
        gains = _gains(codes, radices, lab, n_labels, subsets)
        evaluated += len(subsets)
        top = int(np.flatnonzero(gains >= gains.max() - GAIN_TIE_TOL)[0])
        if gains[top] > best_gain + GAIN_TIE_TOL:
            best_gain, best_subset = float(gains[top]), tuple(int(i) for i in subsets[top])
    return Selection(SelectionMask(best_subset, dim), best_gain, evaluated=evaluated)


@dataclass
class BankEntry:
    entity: str
    mask: SelectionMask
    features: np.ndarray

    @property
    def salient(self) -> np.ndarray:
        return apply_mask(self.mask, self.features)


@dataclass
class FeatureBank:
    scale: str  # "road" or "subsegment"
    entries: list[BankEntry]
    gain: float = 0.0
    degenerate: bool = False

    def __post_init__(self):
        names = [e.entity for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("every entity must appear exactly once in a bank")

    def __len__(self):
        return len(self.entries)

    @property
    def n_selected(self) -> int:
        return sum(len(e.mask) for e in self.entries)


@dataclass
class SalientConfig:
    l_min: int = 10
    f_max: int = 4
    bin_width_rsrp: float = 2.0
    bin_width_gradient: float = 0.2


def subsegment_labels(length: int, boundaries: Sequence[int]) -> np.ndarray:
    """Sub-segment index of every sample; a shared boundary sample goes right."""
    return np.searchsorted(np.asarray(boundaries, dtype=np.int64), np.arange(length), side="right")


def build_feature_banks(scenario: Scenario, boundaries: Mapping[str, Sequence[int]],
                        cfg: SalientConfig) -> tuple[FeatureBank, dict[str, FeatureBank]]:
    """Road bank over all roads plus one sub-segment bank per road."""
    k = scenario.k
    widths = bin_widths_for(k, cfg.bin_width_rsrp, cfg.bin_width_gradient)
    window = max(2, int(cfg.l_min))

    per_sample = [sample_features(r, window) for r in scenario.roads]
    road_labels = np.concatenate([np.full(r.length, i) for i, r in enumerate(scenario.roads)])
    road_sel = select_salient(np.concatenate(per_sample), road_labels, cfg.f_max, widths)
    road_bank = FeatureBank(
        "road",
        [BankEntry(r.road_id, road_sel.mask, feature_set(r)) for r in scenario.roads],
        gain=road_sel.gain,
        degenerate=road_sel.degenerate,
    )

    sub_banks = {}
    for road, values in zip(scenario.roads, per_sample):
        b = tuple(boundaries[road.road_id])
        edges = (0,) + b + (road.length - 1,)
        sel = select_salient(values, subsegment_labels(road.length, b), cfg.f_max, widths)
        entries = [
            BankEntry(f"{road.road_id}/{l}", sel.mask, feature_set(road.slice(lo, hi)))
            for l, (lo, hi) in enumerate(zip(edges, edges[1:]))
        ]
        sub_banks[road.road_id] = FeatureBank("subsegment", entries, gain=sel.gain,
                                              degenerate=sel.degenerate)
    assert all(len(e.features) == Q * k for e in road_bank.entries)
    return road_bank, sub_banks
