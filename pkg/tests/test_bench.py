import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roadloc.bench import (
    MethodResult,
    RunReport,
    SweepPoint,
    cdf,
    check_report,
    emit_plot_data,
    run_sweep,
    scenario_pair,
    traversal_queries,
    write_report,
)
from roadloc.config import Config

FAST = Config(query_stride=60, timing_repeats=1)


def fake_result(errors, evaluated=10):
    e = np.asarray(errors, dtype=float)
    return MethodResult(e, np.full(e.size, 0.5), np.full(e.size, 0.1), np.full(e.size, evaluated))


def fake_report(methods=("proposed", "rwknn"), values=(2.0, 6.0, 10.0)):
    pts = [
        SweepPoint("grid_size", v, {m: fake_result([1.0 + i + v / 10, 2.0]) for i, m in enumerate(methods)})
        for v in values
    ]
    return RunReport(pts, Config().echo(), {"note": "test"})


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_cdf_examples():
    assert cdf([1, 2, 3]) == [(1.0, 1 / 3), (2.0, 2 / 3), (3.0, 1.0)]
    assert cdf([2.0, 1.0, 2.0, 2.0]) == [(1.0, 0.25), (2.0, 1.0)]
    with pytest.raises(ValueError):
        cdf([])


@pytest.mark.property
@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e4, allow_nan=False), min_size=1, max_size=60))
def test_cdf_properties(errors):
    c = cdf(errors)
    xs, fs = [x for x, _ in c], [f for _, f in c]
    assert xs == sorted(set(float(e) for e in errors))
    assert all(0 < f <= 1 for f in fs) and fs == sorted(fs) and fs[-1] == 1.0
    for x, f in c:
        assert f == sum(e <= x for e in errors) / len(errors)


def test_emit_shape_and_byte_identical(tmp_path):
    report = fake_report()
    paths = emit_plot_data(report, tmp_path / "a")
    names = sorted(p.name for p in paths)
    assert names == ["fig4a.csv", "fig4b.csv", "fig5.csv", "table1.csv"]
    rows = read_csv(tmp_path / "a" / "fig4b.csv")
    assert rows[0] == ["method", "grid_size", "mde_m"] and len(rows) == 1 + 6
    assert len(read_csv(tmp_path / "a" / "fig4a.csv")) == 1 + 6
    emit_plot_data(report, tmp_path / "b")
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()


def test_emit_absent_methods_are_absent(tmp_path):
    emit_plot_data(fake_report(methods=("gift",)), tmp_path)
    for name in ("fig4b.csv", "fig5.csv", "table1.csv"):
        assert {r[0] for r in read_csv(tmp_path / name)[1:]} == {"gift"}


def test_check_report_on_synthetic_data(tmp_path):
    pts = [
        SweepPoint("grid_size", 2.0, {"proposed": fake_result([3.0]), "rwknn": fake_result([5.0])}),
        SweepPoint("grid_size", 10.0, {"proposed": fake_result([3.3]), "rwknn": fake_result([9.0])}),
    ]
    checks = check_report(RunReport(pts, Config().echo(), {}))
    assert [c.passed for c in checks] == [True, True, True]
    paths = write_report(RunReport(pts, Config().echo(), {}), tmp_path)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert len(summary["checks"]) == 3 and tmp_path / "summary.json" in paths


def test_traversal_queries_windows(clean_scenario):
    qs = traversal_queries(clean_scenario, 30, stride=100)
    assert all(q.signals.shape == (30, 6) and q.spacing.shape == (30,) for q in qs)
    r0 = clean_scenario.roads[0]
    np.testing.assert_array_equal(qs[0].signals[-1], r0.rsrp[29])
    np.testing.assert_array_equal(qs[0].truth, r0.positions[29])


def test_heldout_traversal_has_independent_shadowing():
    train, test = scenario_pair(Config(), 0)
    assert not np.array_equal(train.roads[0].rsrp, test.roads[0].rsrp)
    again, _ = scenario_pair(Config(), 0)
    assert np.array_equal(train.roads[0].rsrp, again.roads[0].rsrp)
    other, _ = scenario_pair(Config(), 1)
    assert not np.array_equal(train.roads[0].rsrp, other.roads[0].rsrp)


def test_run_sweep_shape():
    report = run_sweep(FAST, "bs_count", values=[6], methods=["proposed"])
    assert len(report.points) == 1 and list(report.points[0].results) == ["proposed"]
    r = report.points[0].results["proposed"]
    assert r.mde >= 0 and r.errors.size == report.points[0].meta["n_queries"]


@pytest.mark.property
def test_run_sweep_deterministic_errors():
    a = run_sweep(FAST, "bs_count", values=[3], methods=["proposed", "rwknn", "gift"])
    b = run_sweep(FAST, "bs_count", values=[3], methods=["proposed", "rwknn", "gift"])
    for m in a.methods:
        ea, eb = a.points[0].results[m].errors, b.points[0].results[m].errors
        assert ea.tobytes() == eb.tobytes()
    sizes = {r.errors.size for r in a.points[0].results.values()}
    assert len(sizes) == 1


def test_run_sweep_rejects_unknown():
    with pytest.raises(ValueError):
        run_sweep(FAST, "speed")
    with pytest.raises(ValueError):
        run_sweep(FAST, "bs_count", methods=["magic"])
