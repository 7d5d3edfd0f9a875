import math

import numpy as np
import pytest

from conftest import straight_sequence
from roadloc.baselines import (
    CurveFitModel,
    GridFingerprintDB,
    cfels_locate,
    gift_locate,
    rwknn_locate,
    trailing_gradient,
)
from roadloc.signal_model import Position2D, Scenario, SignalSequence, arc_lengths
from roadloc.synth import BaseStation, ChannelParams, LayoutSpec, generate


def tiny_db(rsrp, centers, gradient=None):
    rsrp = np.asarray(rsrp, dtype=float)
    centers = np.asarray(centers, dtype=float)
    n = len(rsrp)
    return GridFingerprintDB(
        1.0, (0.0, 0.0), np.zeros((n, 2), dtype=np.int64), centers, rsrp,
        np.zeros_like(rsrp) if gradient is None else np.asarray(gradient, float),
        np.argmax(rsrp, axis=1), np.ones(n, dtype=np.int64), 10,
    )


def test_rwknn_examples():
    db = tiny_db([[-60, -90], [-70, -95], [-90, -85], [-65, -92]], [[0, 0], [10, 0], [20, 0], [5, 5]])
    pos, n = rwknn_locate(db, [-70, -95], k=3)
    assert pos.distance(Position2D(10, 0)) < 1e-3
    assert n == 3  # cells whose strongest BS is BS 0
    pos, _ = rwknn_locate(db, [-61, -91], k=1)
    assert (pos.x, pos.y) == (0.0, 0.0)
    sym = tiny_db([[-60, -80], [-70, -80]], [[0, 0], [10, 0]])
    pos, _ = rwknn_locate(sym, [-65, -80], k=2)
    assert pos.x == pytest.approx(5.0) and pos.y == pytest.approx(0.0)


def test_rwknn_falls_back_when_restriction_empty():
    db = tiny_db([[-60, -90], [-62, -95]], [[0, 0], [10, 0]])
    pos, n = rwknn_locate(db, [-99, -70], k=1)
    assert n == 2 and (pos.x, pos.y) == (0.0, 0.0)


def test_rwknn_rejects_empty_db():
    db = tiny_db(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(ValueError):
        rwknn_locate(db, [-70, -80])


def test_grid_db_cells(clean_scenario):
    db = GridFingerprintDB.build(clean_scenario, 4.0)
    assert db.counts.min() >= 1 and db.counts.sum() == sum(r.length for r in clean_scenario.roads)
    pos = np.vstack([r.positions for r in clean_scenario.roads])
    # every sample falls inside its cell
    idx = np.floor((pos - db.origin) / 4.0).astype(int)
    assert {tuple(c) for c in idx} == {tuple(c) for c in db.cells}
    coarse = GridFingerprintDB.build(clean_scenario, 10.0)
    assert len(coarse) < len(db)


def test_trailing_gradient_shortens_at_start():
    seq = straight_sequence(np.arange(6.0) * -2 - 60)
    g = trailing_gradient(seq, 3)
    np.testing.assert_allclose(g[:, 0], -2.0)


def test_gift_matches_linear_scan(clean_scenario):
    db = GridFingerprintDB.build(clean_scenario, 2.0, window=10)
    rng = np.random.default_rng(4)
    for _ in range(20):
        r = clean_scenario.roads[int(rng.integers(0, 4))]
        j = int(rng.integers(15, r.length))
        win = r.slice(j - 14, j)
        pos, n = gift_locate(db, win)
        # 10 samples ending at j give 9 per-meter differences
        step = np.hypot(*np.diff(r.positions[j - 9 : j + 1], axis=0).T)
        q = (np.diff(r.rsrp[j - 9 : j + 1], axis=0) / step[:, None]).mean(axis=0)
        best = min(range(len(db)), key=lambda c: float(np.sum((db.gradient[c] - q) ** 2)))
        assert (pos.x, pos.y) == tuple(db.centers[best]) and n == len(db)


def test_gift_examples():
    db = tiny_db([[-60], [-70]], [[0, 0], [9, 0]], gradient=[[0.0], [-1.0]])
    assert gift_locate(db, straight_sequence([-70.0] * 12))[0] == Position2D(0, 0)
    assert gift_locate(db, straight_sequence(-60 - np.arange(12.0)))[0] == Position2D(9, 0)


def test_cfels_noiseless_on_curve(clean_scenario):
    model = CurveFitModel.build(clean_scenario, 0.1)
    fit = model.roads[1]
    for p in (137, 1555, 2811):
        s = fit.arc[p] + 0.04
        xy = np.array([np.interp(s, fit.arc, fit.xy[:, 0]), np.interp(s, fit.arc, fit.xy[:, 1])])
        d = np.log10(np.hypot(*(xy[None, :] - clean_scenario.bs_positions).T))
        pos, _ = cfels_locate(model, fit.intercept + fit.slope * d)
        assert pos.distance(Position2D(*xy)) <= 0.1


@pytest.mark.property
def test_cfels_point_count_and_argmin(clean_scenario):
    model = CurveFitModel.build(clean_scenario, 0.1)
    expected = sum(math.ceil(arc_lengths(r)[-1] / 0.1) + 1 for r in clean_scenario.roads)
    o = clean_scenario.roads[2].rsrp[40]
    pos, n = cfels_locate(model, o)
    assert n == model.n_points == expected
    costs = np.concatenate([np.sum((r.predicted - o) ** 2, axis=1) for r in model.roads])
    pts = np.vstack([r.xy for r in model.roads])
    assert np.sum((pts - [pos.x, pos.y]) ** 2, axis=1)[np.argmin(costs)] < 1e-18


def test_cfels_tie_goes_to_smaller_road_id():
    bs = (BaseStation(0, (50.0, 50.0), 46.0, 3.0),)
    layout = LayoutSpec((np.array([[0, 60], [100, 60]]), np.array([[0, 40], [100, 40]])), bs,
                        (0, 0, 100, 100), road_ids=("b", "a"))
    model = CurveFitModel.build(generate(layout, ChannelParams(sigma=0)), 0.1)
    pos, _ = cfels_locate(model, [-60.0])
    assert pos.y == pytest.approx(40.0)


@pytest.mark.property
def test_baselines_deterministic(clean_scenario):
    db = GridFingerprintDB.build(clean_scenario, 2.0)
    model = CurveFitModel.build(clean_scenario, 0.5)
    o = clean_scenario.roads[0].rsrp[77] + 1.5
    win = clean_scenario.roads[0].slice(60, 78)
    assert rwknn_locate(db, o) == rwknn_locate(db, o)
    assert gift_locate(db, win) == gift_locate(db, win)
    assert cfels_locate(model, o) == cfels_locate(model, o)


def test_cfels_needs_bs_positions():
    seq = SignalSequence("r", np.column_stack([np.arange(5.0), np.zeros(5)]), np.full((5, 1), -70.0))
    with pytest.raises(ValueError):
        CurveFitModel.build(Scenario(1, np.zeros((0, 2)), (seq,)), 0.1)
