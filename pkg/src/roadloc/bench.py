"""Benchmark harness: MDE and delay sweeps over BS count and grid size.

Every sweep point rebuilds the radio map and the baseline databases from a
training scenario, then localizes a held-out traversal of the same roads
with an independent shadowing realization. Error values are deterministic
per seed; wall-clock delays are not.
"""

from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .baselines import CurveFitModel, GridFingerprintDB, cfels_locate, gift_locate, rwknn_locate
from .config import Config
from .features import feature_set
from .localizer import extract_window, localize
from .radiomap import RadioMap, build_radio_map
from .signal_model import Scenario, arc_lengths
from .synth import channel_from_config, generate, layout_from_config

METHODS = ("proposed", "rwknn", "gift", "cfels")
SWEEPS = ("bs_count", "grid_size")
HARDWARE_NOTE = "wall-clock delays depend on hardware and load; compare within one run only"


@dataclass
class MethodResult:
    errors: np.ndarray
    delays_ms: np.ndarray
    extraction_ms: np.ndarray
    evaluated: np.ndarray

    @property
    def mde(self) -> float:
        return float(np.mean(self.errors))

    @property
    def mean_delay_ms(self) -> float:
        return float(np.mean(self.delays_ms))

    @property
    def mean_extraction_ms(self) -> float:
        return float(np.mean(self.extraction_ms))

    @property
    def mean_evaluated(self) -> float:
        return float(np.mean(self.evaluated))


@dataclass
class SweepPoint:
    sweep: str
    value: float
    results: dict[str, MethodResult]
    meta: dict = field(default_factory=dict)


@dataclass
class RunReport:
    points: list[SweepPoint]
    config: dict
    environment: dict

    def sweep(self, name: str) -> list[SweepPoint]:
        return [p for p in self.points if p.sweep == name]

    @property
    def methods(self) -> list[str]:
        seen = []
        for p in self.points:
            for m in p.results:
                if m not in seen:
                    seen.append(m)
        return seen

    def summary(self) -> dict:
        return {
            "environment": self.environment,
            "config": self.config,
            "points": [
                {
                    "sweep": p.sweep,
                    "value": p.value,
                    **p.meta,
                    "methods": {
                        m: {
                            "mde_m": r.mde,
                            "mean_delay_ms": r.mean_delay_ms,
                            "mean_extraction_ms": r.mean_extraction_ms,
                            "mean_evaluated": r.mean_evaluated,
                            "n_queries": int(r.errors.size),
                        }
                        for m, r in p.results.items()
                    },
                }
                for p in self.points
            ],
        }


def cdf(errors) -> list[tuple[float, float]]:
    """Empirical CDF as ``(error, fraction <= error)`` pairs, one per distinct error."""
    e = np.sort(np.asarray(errors, dtype=np.float64).ravel())
    if e.size == 0:
        raise ValueError("cdf of an empty error set")
    values, idx = np.unique(e, return_index=True)
    last = np.append(idx[1:], e.size)
    return [(float(v), float(c) / e.size) for v, c in zip(values, last)]


@dataclass(frozen=True)
class Query:
    road: int
    index: int
    truth: np.ndarray
    signals: np.ndarray  # (W, K) newest last
    spacing: np.ndarray  # (W,)


def traversal_queries(scenario: Scenario, window: int, stride: int = 1, start: int | None = None) -> list[Query]:
    """Sliding windows over every road of a traversal, one query per ``stride`` samples.

    The first query on a road ends at sample ``start`` (default ``window - 1``).
    """
    if start is None:
        start = window - 1
    start = max(start, window - 1)
    out = []
    for i, r in enumerate(scenario.roads):
        gap = np.concatenate(([0.0], np.diff(arc_lengths(r))))
        for j in range(start, r.length, stride):
            lo = j - window + 1
            out.append(Query(i, j, r.positions[j].copy(), r.rsrp[lo : j + 1], gap[lo : j + 1]))
    return out


def _median_time(fn, repeats: int) -> tuple[float, object]:
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return float(np.median(times)), out


def _err(pos, truth) -> float:
    return math.hypot(pos.x - truth[0], pos.y - truth[1])


def _run_proposed(rm: RadioMap, queries, window, repeats) -> MethodResult:
    errs, delays, extr, evals = [], [], [], []
    w = rm.default_window
    for q in queries:
        seq = extract_window(q.signals, q.spacing, w)
        ext, e_u = _median_time(lambda: feature_set(seq), repeats)
        runs = [localize(e_u, seq.rsrp[-1], rm) for _ in range(repeats)]
        res = runs[-1]
        errs.append(_err(res.position, q.truth))
        delays.append(float(np.median([r.elapsed_ms for r in runs])))
        extr.append(ext)
        evals.append(res.work)
    return MethodResult(np.array(errs), np.array(delays), np.array(extr), np.array(evals))


def _run_baseline(fn, queries, repeats) -> MethodResult:
    errs, delays, evals = [], [], []
    for q in queries:
        dt, (pos, n) = _median_time(lambda: fn(q), repeats)
        errs.append(_err(pos, q.truth))
        delays.append(dt)
        evals.append(n)
    z = np.zeros(len(errs))
    return MethodResult(np.array(errs), np.array(delays), z, np.array(evals))


def _evaluate(methods, train: Scenario, test: Scenario, cfg: Config, grid_size: float,
              rm: RadioMap | None = None) -> tuple[dict[str, MethodResult], dict]:
    if rm is None and "proposed" in methods:
        rm = build_radio_map(train, cfg)
    window = rm.default_window if rm is not None else max(cfg.l_min, cfg.window or 0)
    queries = traversal_queries(test, max(window, cfg.l_min), cfg.query_stride)
    if not queries:
        raise ValueError("held-out traversal is shorter than the query window")
    repeats = cfg.timing_repeats
    results = {}
    meta = {"window": window, "n_queries": len(queries)}
    if "rwknn" in methods or "gift" in methods:
        db = GridFingerprintDB.build(train, grid_size, cfg.l_min)
        meta["grid_cells"] = len(db)
    for m in methods:
        # one untimed pass over a few queries warms caches and compiled kernels
        if m == "proposed":
            _run_proposed(rm, queries[:3], window, 1)
            results[m] = _run_proposed(rm, queries, window, repeats)
            meta["n_r"] = rm.n_r
            meta["n_s"] = {r.road_id: r.n_s for r in rm.roads}
            meta["subsegments"] = {r.road_id: r.n_subsegments for r in rm.roads}
        elif m == "rwknn":
            fn = lambda q: rwknn_locate(db, q.signals[-1], cfg.rwknn_k)  # noqa: E731
            _run_baseline(fn, queries[:3], 1)
            results[m] = _run_baseline(fn, queries, repeats)
        elif m == "gift":
            fn = lambda q: gift_locate(db, extract_window(q.signals, q.spacing, q.signals.shape[0]))  # noqa: E731
            _run_baseline(fn, queries[:3], 1)
            results[m] = _run_baseline(fn, queries, repeats)
        elif m == "cfels":
            model = CurveFitModel.build(train, cfg.cfels_step)
            fn = lambda q: cfels_locate(model, q.signals[-1])  # noqa: E731
            _run_baseline(fn, queries[:3], 1)
            results[m] = _run_baseline(fn, queries, repeats)
            meta["cfels_points"] = model.n_points
        else:
            raise ValueError(f"unknown method {m!r}")
    return results, meta


def scenario_pair(cfg: Config, trial: int = 0) -> tuple[Scenario, Scenario]:
    """Training scenario and held-out traversal with independent shadowing."""
    layout = layout_from_config(cfg)
    seeds = np.random.SeedSequence([cfg.seed, trial]).generate_state(2)
    train = generate(layout, channel_from_config(cfg, seed=int(seeds[0])))
    test = generate(layout, channel_from_config(cfg, seed=int(seeds[1])))
    return train, test


def _merge(parts: list[dict[str, MethodResult]]) -> dict[str, MethodResult]:
    out = {}
    for m in parts[0]:
        out[m] = MethodResult(*(np.concatenate([getattr(p[m], f) for p in parts])
                                for f in ("errors", "delays_ms", "extraction_ms", "evaluated")))
    return out


def run_sweep(cfg: Config, sweep: str, values=None, methods=None, trials: int | None = None) -> RunReport:
    """Evaluate ``methods`` at every sweep point, pooling errors over ``trials``.

    ``sweep="bs_count"`` keeps the first ``b`` BS columns (MBS first) for both
    the training and held-out data; ``sweep="grid_size"`` varies the baseline
    grid with all BSs kept. The radio map does not depend on the grid size, so
    it is built once per trial for that sweep.
    """
    if sweep not in SWEEPS:
        raise ValueError(f"unknown sweep {sweep!r}; choose from {SWEEPS}")
    methods = list(methods or cfg.methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    if values is None:
        values = cfg.bs_counts if sweep == "bs_count" else cfg.grid_sizes
    trials = cfg.trials if trials is None else trials
    if trials < 1:
        raise ValueError("trials must be >= 1")
    pairs = [scenario_pair(cfg, t) for t in range(trials)]
    maps = {}
    points = []
    for v in values:
        parts, meta = [], {}
        for t, (train, test) in enumerate(pairs):
            try:
                if sweep == "bs_count":
                    b = int(v)
                    res, meta = _evaluate(methods, train.restrict_bs(b), test.restrict_bs(b), cfg, cfg.grid_size)
                else:
                    if t not in maps and "proposed" in methods:
                        maps[t] = build_radio_map(train, cfg)
                    res, meta = _evaluate(methods, train, test, cfg, float(v), maps.get(t))
            except Exception as exc:
                raise RuntimeError(f"{sweep}={v} trial {t}: {exc}") from exc
            parts.append(res)
        points.append(SweepPoint(sweep, float(v), _merge(parts), meta))
    return RunReport(points, cfg.echo(), environment())


def run_bench(cfg: Config) -> RunReport:
    """Both sweeps, merged into one report."""
    a = run_sweep(cfg, "bs_count")
    b = run_sweep(cfg, "grid_size")
    return RunReport(a.points + b.points, cfg.echo(), environment())


def environment() -> dict:
    return {
        "python": platform.python_version(),
        "machine": platform.machine(),
        "numba": kernels.USE_NUMBA,
        "note": HARDWARE_NOTE,
    }


def _fmt(v: float) -> str:
    return repr(float(v))


def _write(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def emit_plot_data(report: RunReport, out_dir) -> list[Path]:
    """Write long-format CSVs per figure; files for absent sweeps are skipped.

    * ``fig3a.csv`` / ``fig3b.csv``: delay / MDE against BS count
    * ``fig4a.csv`` / ``fig4b.csv``: delay / MDE against grid size
    * ``fig5.csv``: error CDF per method at the reference point
    * ``table1.csv``: mean delay per method at the reference point
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for sweep, (fa, fb) in {"bs_count": ("fig3a", "fig3b"), "grid_size": ("fig4a", "fig4b")}.items():
        pts = report.sweep(sweep)
        if not pts:
            continue
        delay_rows, mde_rows = [], []
        for p in pts:
            for m, r in p.results.items():
                delay_rows.append([m, _fmt(p.value), _fmt(r.mean_delay_ms), _fmt(r.mean_extraction_ms)])
                mde_rows.append([m, _fmt(p.value), _fmt(r.mde)])
        _write(out / f"{fa}.csv", ["method", sweep, "mean_delay_ms", "extraction_ms"], delay_rows)
        _write(out / f"{fb}.csv", ["method", sweep, "mde_m"], mde_rows)
        written += [out / f"{fa}.csv", out / f"{fb}.csv"]
    ref = reference_point(report)
    if ref is not None:
        rows = [[m, _fmt(e), _fmt(f)] for m, r in ref.results.items() for e, f in cdf(r.errors)]
        _write(out / "fig5.csv", ["method", "error_m", "cdf"], rows)
        rows = [[m, _fmt(r.mean_delay_ms), _fmt(r.mean_extraction_ms), _fmt(r.mean_evaluated), _fmt(r.mde)]
                for m, r in ref.results.items()]
        _write(out / "table1.csv", ["method", "mean_delay_ms", "extraction_ms", "mean_evaluated", "mde_m"], rows)
        written += [out / "fig5.csv", out / "table1.csv"]
    return written


def reference_point(report: RunReport) -> SweepPoint | None:
    """The all-BS point of the BS sweep, else the finest grid of the grid sweep."""
    bs = report.sweep("bs_count")
    if bs:
        return max(bs, key=lambda p: p.value)
    grid = report.sweep("grid_size")
    if grid:
        return min(grid, key=lambda p: p.value)
    return None


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def check_report(report: RunReport, work_factor: int = 4) -> list[Check]:
    """Ordering checks on a report; only methods present are compared."""
    checks = []
    grid = sorted(report.sweep("grid_size"), key=lambda p: p.value)
    if grid and "proposed" in grid[0].results:
        fine, coarse = grid[0], grid[-1]
        p = fine.results["proposed"].mde
        others = {m: r.mde for m, r in fine.results.items() if m != "proposed"}
        ok = all(p < v for v in others.values())
        detail = ", ".join(f"{m}={v:.2f}" for m, v in sorted(others.items()))
        checks.append(Check(f"proposed MDE lowest at grid {fine.value:g} m", ok, f"proposed={p:.2f} m; {detail}"))

        def growth(m):
            a, b = fine.results[m].mde, coarse.results[m].mde
            return (b - a) / a if a > 0 else 0.0

        g = growth("proposed")
        checks.append(Check(f"proposed MDE grows < 25% from grid {fine.value:g} to {coarse.value:g} m",
                            g < 0.25, f"growth={g:+.1%}"))
        gs = {m: growth(m) for m in others}
        checks.append(Check("some baseline MDE grows > 25%", any(v > 0.25 for v in gs.values()),
                            ", ".join(f"{m}={v:+.1%}" for m, v in sorted(gs.items()))))
    ref = reference_point(report)
    if ref is not None and {"proposed", "rwknn", "cfels"} <= set(ref.results):
        p, r, c = (ref.results[m].mean_evaluated for m in ("proposed", "rwknn", "cfels"))
        checks.append(Check("evaluated: proposed < rwknn < cfels", p < r < c,
                            f"proposed={p:.1f}, rwknn={r:.1f}, cfels={c:.1f}"))
        n_r = ref.meta.get("n_r", 0)
        n_s_max = max(ref.meta.get("n_s", {0: 0}).values())
        k = int(ref.value) if ref.sweep == "bs_count" else len(report.config["bs_positions"])
        bound = work_factor * (n_r + n_s_max + k)
        checks.append(Check(f"proposed work <= {work_factor}(N_r + N_s + K)", p <= bound, f"{p:.1f} <= {bound}"))
        checks.append(Check("cfels evaluates >= 10x proposed", c >= 10 * p, f"ratio={c / p:.0f}"))
    return checks


def write_report(report: RunReport, out_dir) -> list[Path]:
    out = Path(out_dir)
    paths = emit_plot_data(report, out)
    summary = report.summary()
    summary["checks"] = [c.__dict__ for c in check_report(report)]
    (out / "summary.json").write_text(json.dumps(summary, indent=1, sort_keys=True, default=float))
    return paths + [out / "summary.json"]
