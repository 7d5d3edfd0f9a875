import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from roadloc import kernels
from roadloc.salient import (
    SalientConfig,
    SelectionMask,
    apply_mask,
    bin_widths_for,
    build_feature_banks,
    discretize,
    entropy,
    information_gain,
    select_salient,
    subsegment_labels,
)


def table_gain(labels, columns, width):
    """Information gain from an explicit joint probability table."""
    n = len(labels)
    joint = Counter()
    for j in range(n):
        cell = tuple(math.floor(c[j] / width) for c in columns)
        joint[(cell, labels[j])] += 1
    p_lab, p_cell = Counter(), Counter()
    for (cell, lab), c in joint.items():
        p_lab[lab] += c / n
        p_cell[cell] += c / n
    h = -sum(p * math.log2(p) for p in p_lab.values())
    h_cond = -sum((c / n) * math.log2((c / n) / p_cell[cell]) for (cell, _), c in joint.items())
    return h - h_cond


def test_discretize_examples():
    assert discretize([0.1, 0.2, 1.1], 1.0) == {0: 2, 1: 1}
    assert discretize([3.3], 0.5) == {6: 1}
    a = discretize([0.1, 0.7, 2.5], 0.5)
    b = discretize([0.6, 1.2, 3.0], 0.5)
    assert {k + 1: v for k, v in a.items()} == b
    with pytest.raises(ValueError):
        discretize([1.0], 0.0)


def test_entropy_examples():
    assert entropy({0: 5}) == 0.0
    assert entropy({0: 3, 1: 3}) == pytest.approx(1.0)
    assert entropy({0: 1, 1: 1, 2: 1, 3: 1}) == pytest.approx(2.0)


def test_information_gain_examples():
    labels = ["a"] * 5 + ["b"] * 5
    assert information_gain(labels, [1.0] * 10, 1.0) == 0.0
    assert information_gain(labels, [0.0] * 5 + [10.0] * 5, 1.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        information_gain(["a"] * 3, [1, 2, 3], 1.0)


def test_information_gain_matches_probability_table():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n = int(rng.integers(10, 60))
        labels = rng.integers(0, 2, n).tolist()
        if len(set(labels)) < 2:
            continue
        cols = [rng.normal(0, 2, n) for _ in range(int(rng.integers(1, 3)))]
        got = information_gain(labels, np.column_stack(cols), 1.0)
        assert got == pytest.approx(table_gain(labels, cols, 1.0), abs=1e-9)


def test_select_salient_examples():
    n = 40
    labels = np.repeat([0, 1], n // 2)
    x = np.zeros((n, 6))
    x[:, 4] = labels * 10.0
    sel = select_salient(x, labels, 4, 1.0)
    assert sel.mask.selected == (4,) and sel.gain == pytest.approx(1.0)
    same = np.tile(np.arange(n, dtype=float)[:, None] % 3, (1, 5))
    assert select_salient(same, labels, 3, 1.0).mask.selected == (0,)


def test_select_salient_degenerate_single_label():
    x = np.column_stack([np.zeros(10), np.arange(10.0), np.arange(10.0) * 3])
    sel = select_salient(x, np.zeros(10), 2, 1.0)
    assert sel.degenerate and sel.mask.selected == (1, 2)


def test_apply_mask_examples():
    m = SelectionMask((1,), 3)
    assert apply_mask(m, [3, 7, 5]).tolist() == [0, 7, 0]
    assert apply_mask(SelectionMask((0, 1, 2), 3), [3, 7, 5]).tolist() == [3, 7, 5]
    assert apply_mask(m, [0, 0, 0]).tolist() == [0, 0, 0]
    with pytest.raises(ValueError):
        apply_mask(m, [1, 2])
    with pytest.raises(ValueError):
        SelectionMask((), 3)
    with pytest.raises(ValueError):
        SelectionMask((3,), 3)


def test_bin_widths_layout():
    assert bin_widths_for(2, 2.0, 0.2).tolist() == [0.2, 0.2] + [2.0] * 8


def test_subsegment_labels():
    assert subsegment_labels(6, [2, 4]).tolist() == [0, 0, 1, 1, 2, 2]


def test_gain_kernel_backends_agree():
    rng = np.random.default_rng(11)
    codes = rng.integers(0, 6, (300, 8)).astype(np.int64)
    radices = np.full(8, 6, dtype=np.int64)
    labels = rng.integers(0, 3, 300).astype(np.int64)
    subsets = np.array(list(itertools.combinations(range(8), 3)), dtype=np.int64)
    ref = kernels.backend("numpy").subset_gains(codes, radices, labels, 3, subsets)
    if kernels.USE_NUMBA:
        got = kernels.backend("numba").subset_gains(codes, radices, labels, 3, subsets)
        np.testing.assert_allclose(got, ref, atol=1e-12)
    for s, gain in zip(subsets[:10], ref):
        assert gain == pytest.approx(information_gain(labels, codes[:, s].astype(float), 1.0), abs=1e-9)


def test_feature_banks_shape(clean_scenario, clean_map):
    boundaries = {r.road_id: r.boundaries for r in clean_map.roads}
    road_bank, sub_banks = build_feature_banks(clean_scenario, boundaries, SalientConfig())
    assert len(road_bank) == clean_scenario.m
    for r in clean_map.roads:
        assert len(sub_banks[r.road_id]) == r.n_subsegments
        for e in sub_banks[r.road_id].entries:
            np.testing.assert_array_equal(e.salient, apply_mask(e.mask, e.features))


def test_single_road_bank_is_degenerate(clean_scenario):
    from roadloc.signal_model import Scenario

    one = Scenario(clean_scenario.k, clean_scenario.bs_positions, clean_scenario.roads[:1])
    road_bank, _ = build_feature_banks(one, {one.roads[0].road_id: ()}, SalientConfig())
    assert road_bank.degenerate and len(road_bank) == 1


@pytest.mark.property
@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(6, 40), elements=st.floats(-20, 20, allow_nan=False)),
       st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_gain_bounds_and_permutation(values, n_labels, seed):
    rng = np.random.default_rng(seed)
    labels = np.arange(values.size) % n_labels
    h = entropy(Counter(labels.tolist()))
    g = information_gain(labels, values, 1.5)
    assert -1e-12 <= g <= h + 1e-12
    # label-independent feature: a constant has zero gain
    assert information_gain(labels, np.full(values.size, values[0]), 1.5) == 0.0
    perm = rng.permutation(values.size)
    assert 0.0 <= information_gain(labels, values[perm], 1.5) <= h + 1e-12


@pytest.mark.property
def test_shuffled_feature_gain_shrinks():
    rng = np.random.default_rng(2)
    labels = np.repeat(np.arange(4), 500)
    x = labels * 3.0 + rng.normal(0, 0.5, labels.size)
    informative = information_gain(labels, x, 1.0)
    shuffled = np.mean([information_gain(labels, rng.permutation(x), 1.0) for _ in range(5)])
    assert informative > 1.5
    assert shuffled < 0.05


@pytest.mark.property
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda d: st.tuples(
    st.just(d), st.lists(st.integers(0, d - 1), min_size=1, max_size=d, unique=True),
    arrays(np.float64, d, elements=st.floats(-1e3, 1e3, allow_nan=False)),
    st.floats(-10, 10, allow_nan=False))))
def test_mask_idempotent_and_ignores_unselected(case):
    d, sel, e, c = case
    m = SelectionMask(tuple(sel), d)
    once = apply_mask(m, e)
    np.testing.assert_array_equal(apply_mask(m, once), once)
    scaled = e.copy()
    off = [i for i in range(d) if i not in sel]
    scaled[off] *= c
    np.testing.assert_array_equal(apply_mask(m, scaled), once)


@pytest.mark.property
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_selection_deterministic_and_capped(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(0, 3, (50, 6))
    labels = rng.integers(0, 3, 50)
    a = select_salient(x, labels, 3, 1.0)
    b = select_salient(x, labels, 3, 1.0)
    assert a.mask == b.mask and a.gain == b.gain
    assert 1 <= len(a.mask) <= 3
