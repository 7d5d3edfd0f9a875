import numpy as np
import pytest

from roadloc.features import feature_set
from roadloc.signal_model import FLOOR_DBM, parse_dataset, serialize_dataset
from roadloc.synth import (
    BaseStation,
    ChannelParams,
    LayoutSpec,
    channel_from_config,
    generate,
    layout_from_config,
    rsrp_at,
    rsrp_field,
    timestamps,
)


def test_rsrp_examples():
    bs = BaseStation(0, (0.0, 0.0), 40.0, 2.0)
    assert rsrp_at((100.0, 0.0), bs, ChannelParams(pl0=40, sigma=0)) == pytest.approx(-40.0)
    bs1 = BaseStation(0, (0.0, 0.0), 30.0, 3.5)
    assert rsrp_at((1.0, 0.0), bs1, ChannelParams(pl0=40, sigma=0)) == pytest.approx(-10.0)
    # coincident position uses the 0.5 m guard distance
    assert rsrp_at((0.0, 0.0), bs1, ChannelParams(sigma=0)) == pytest.approx(-10.0 - 35 * np.log10(0.5))


def test_rsrp_deterministic_and_clamped():
    bs = BaseStation(2, (10.0, 10.0), 30.0, 3.5)
    pts = np.random.default_rng(0).uniform(0, 600, (50, 2))
    a = rsrp_field(pts, bs, ChannelParams(seed=5))
    assert a.tobytes() == rsrp_field(pts, bs, ChannelParams(seed=5)).tobytes()
    assert not np.array_equal(a, rsrp_field(pts, bs, ChannelParams(seed=6)))
    weak = BaseStation(0, (0.0, 0.0), -200.0, 3.5)
    assert rsrp_at((500.0, 0.0), weak, ChannelParams(sigma=0)) == FLOOR_DBM


def test_shadow_statistics():
    bs = BaseStation(1, (0.0, 0.0), 30.0, 3.5)
    pts = np.random.default_rng(1).uniform(0, 5000, (4000, 2))
    clean = rsrp_field(pts, bs, ChannelParams(sigma=0))
    noisy = rsrp_field(pts, bs, ChannelParams(sigma=4.0, seed=3))
    shadow = clean - noisy
    assert abs(shadow.mean()) < 0.6 and 3.0 < shadow.std() < 5.0
    # nearby points are correlated, distant ones are not
    base = np.column_stack([np.linspace(0, 4000, 2000), np.full(2000, 100.0)])
    s0 = rsrp_field(base, bs, ChannelParams(sigma=0)) - rsrp_field(base, bs, ChannelParams(seed=9))
    near = rsrp_field(base + [1.0, 0], bs, ChannelParams(sigma=0)) - rsrp_field(base + [1.0, 0], bs, ChannelParams(seed=9))
    far = rsrp_field(base + [0, 300.0], bs, ChannelParams(sigma=0)) - rsrp_field(base + [0, 300.0], bs, ChannelParams(seed=9))
    assert np.corrcoef(s0, near)[0, 1] > 0.9
    assert abs(np.corrcoef(s0, far)[0, 1]) < 0.3


def test_uncorrelated_mode_is_deterministic_per_position():
    bs = BaseStation(0, (0.0, 0.0), 46.0, 3.0)
    p = ChannelParams(sigma=4.0, corr_distance=0.0, seed=2)
    pts = np.array([[10.0, 10.0], [11.0, 10.0], [10.0, 10.0]])
    v = rsrp_field(pts, bs, p)
    assert v[0] == v[2] and v[0] != v[1]


@pytest.mark.property
def test_default_layout(default_cfg):
    layout = layout_from_config(default_cfg)
    sc = generate(layout, channel_from_config(default_cfg))
    assert sc.m == 4 and sc.k == 6
    for verts, road in zip(layout.roads, sc.roads):
        length = np.hypot(*np.diff(verts, axis=0).T).sum()
        assert abs(road.length - length) <= 2
        assert road.rsrp.max() < 0 and road.rsrp.min() >= FLOOR_DBM
    back = parse_dataset(serialize_dataset(sc))
    for a, b in zip(sc.roads, back.roads):
        np.testing.assert_allclose(a.rsrp, b.rsrp, atol=1e-6)
        np.testing.assert_allclose(a.positions, b.positions, atol=1e-6)


@pytest.mark.property
def test_noise_free_is_seed_independent(default_cfg):
    layout = layout_from_config(default_cfg)
    a = generate(layout, channel_from_config(default_cfg, seed=1, sigma=0.0))
    b = generate(layout, channel_from_config(default_cfg, seed=2, sigma=0.0))
    assert all(np.array_equal(x.rsrp, y.rsrp) for x, y in zip(a.roads, b.roads))


def test_parallel_roads_separable():
    bss = (BaseStation(0, (100.0, 20.0), 46.0, 3.0), BaseStation(1, (20.0, 150.0), 30.0, 3.5))
    layout = LayoutSpec((np.array([[0, 50], [200, 50]]), np.array([[0, 100], [200, 100]])), bss, (0, 0, 200, 200))
    sc = generate(layout, ChannelParams(sigma=0))
    fa, fb = feature_set(sc.roads[0]), feature_set(sc.roads[1])
    k = sc.k
    means_a, means_b = fa[k:2 * k], fb[k:2 * k]
    assert np.max(np.abs(means_a - means_b)) > 1.0


@pytest.mark.property
def test_unimodal_along_straight_road():
    bs = BaseStation(0, (100.0, 30.0), 46.0, 3.0)
    layout = LayoutSpec((np.array([[0, 0], [250, 0]]),), (bs,), (0, 0, 300, 300))
    r = generate(layout, ChannelParams(sigma=0)).roads[0].rsrp[:, 0]
    peak = int(np.argmax(r))
    assert np.all(np.diff(r[: peak + 1]) >= 0) and np.all(np.diff(r[peak:]) <= 0)
    assert abs(peak - 100) <= 1


def test_layout_validation():
    bs = (BaseStation(0, (0.0, 0.0), 46.0, 3.0),)
    with pytest.raises(ValueError):
        LayoutSpec((np.array([[0, 0], [700, 0]]),), bs)
    with pytest.raises(ValueError):
        LayoutSpec((np.array([[0, 0], [10, 0]]),), ())
    with pytest.raises(ValueError):
        ChannelParams(sigma=-1)


def test_generate_rejects_road_through_bs():
    bs = (BaseStation(0, (5.0, 0.0), 46.0, 3.0),)
    with pytest.raises(ValueError, match="too close"):
        generate(LayoutSpec((np.array([[0, 0], [10, 0]]),), bs, (0, 0, 20, 20)), ChannelParams(sigma=0))


def test_timestamps(clean_scenario):
    t = timestamps(clean_scenario.roads[0], 36.0)
    assert t[0] == 0 and t[10] == pytest.approx(1.0)
