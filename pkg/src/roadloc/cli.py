"""Command-line entry point: ``roadloc {generate,build-map,localize,bench,inspect}``.

Exit codes: 0 success, 1 pipeline failure, 2 usage, missing-file or
format errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import Config, parse_override
from .features import feature_names
from .localizer import extract_window, localize_window
from .radiomap import MapFormatError, build_radio_map, load_map, save_map
from .signal_model import DatasetError, Scenario, arc_lengths, ground_truth_csv, parse_dataset, serialize_dataset
from .synth import channel_from_config, generate, layout_from_config


class UsageError(Exception):
    """Bad input supplied by the caller (exit code 2)."""


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roadloc", description="Road-aware two-scale HetNet signal localization.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", type=Path, help="flat TOML config file")
        sp.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")

    g = sub.add_parser("generate", help="write a synthetic dataset, ground truth and query windows")
    with_config(g)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--seed", type=int, help="shadowing seed (overrides config)")
    g.add_argument("--heldout", action="store_true",
                   help="cut query windows from an independent shadowing realization")

    b = sub.add_parser("build-map", help="build a radio map from a dataset CSV")
    with_config(b)
    b.add_argument("--data", type=Path, required=True, help="dataset CSV or a directory holding dataset.csv")
    b.add_argument("--out", type=Path, required=True)

    lo = sub.add_parser("localize", help="localize query windows against a map")
    lo.add_argument("--map", type=Path, required=True)
    lo.add_argument("--query", type=Path, required=True)
    lo.add_argument("--out", type=Path, required=True)

    be = sub.add_parser("bench", help="run the MDE / delay sweeps and write CSV plot data")
    with_config(be)
    be.add_argument("--out", type=Path, required=True)
    be.add_argument("--sweep", choices=["bs_count", "grid_size", "both"], default="both")
    be.add_argument("--no-check", action="store_true", help="exit 0 even if an ordering check fails")

    i = sub.add_parser("inspect", help="summarize a radio map")
    i.add_argument("--map", type=Path, required=True)
    return p


def _config(args) -> Config:
    data = {}
    if args.config is not None:
        if not args.config.is_file():
            raise UsageError(f"config file not found: {args.config}")
        try:
            base = Config.load(args.config)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        data = base.echo()
    try:
        for text in args.overrides:
            key, value = parse_override(text)
            data[key] = value
        return Config.from_mapping(data) if data else Config()
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _read(path: Path) -> str:
    if not path.is_file():
        raise UsageError(f"file not found: {path}")
    return path.read_text()


def query_csv(scenario: Scenario, window: int, stride: int) -> tuple[str, str]:
    """Query windows (no coordinates) and their truth table."""
    q, t = io.StringIO(), io.StringIO()
    qw = csv.writer(q, lineterminator="\n")
    tw = csv.writer(t, lineterminator="\n")
    qw.writerow(["query_id", "idx", "spacing"] + [f"rsrp_{k}" for k in range(scenario.k)])
    tw.writerow(["query_id", "road_id", "idx", "x", "y"])
    qid = 0
    for r in scenario.roads:
        gap = np.concatenate(([0.0], np.diff(arc_lengths(r))))
        for j in range(window - 1, r.length, stride):
            lo = j - window + 1
            for a in range(lo, j + 1):
                qw.writerow([qid, a - lo, f"{gap[a] if a > lo else 0.0:.6f}"] + [f"{v:.6f}" for v in r.rsrp[a]])
            tw.writerow([qid, r.road_id, j, f"{r.positions[j, 0]:.6f}", f"{r.positions[j, 1]:.6f}"])
            qid += 1
    return q.getvalue(), t.getvalue()


def parse_queries(text: str) -> list[tuple[str, np.ndarray, np.ndarray]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:3] != ["query_id", "idx", "spacing"] or len(rows[0]) < 4:
        raise DatasetError("query header must be query_id,idx,spacing,rsrp_0,...", 1)
    width = len(rows[0])
    groups: dict[str, list] = {}
    for n, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != width:
            raise DatasetError(f"expected {width} fields, got {len(row)}", n)
        try:
            groups.setdefault(row[0], []).append((int(row[1]), [float(v) for v in row[2:]]))
        except ValueError as exc:
            raise DatasetError(str(exc), n) from None
    out = []
    for qid, items in groups.items():
        items.sort(key=lambda it: it[0])
        data = np.array([v for _, v in items])
        out.append((qid, data[:, 1:], data[:, 0]))
    return out


def cmd_generate(args) -> int:
    cfg = _config(args)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    layout = layout_from_config(cfg)
    scenario = generate(layout, channel_from_config(cfg))
    source = scenario
    if args.heldout:
        source = generate(layout, channel_from_config(cfg, seed=cfg.seed + 1))
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "dataset.csv").write_text(serialize_dataset(scenario))
    (args.out / "ground_truth.csv").write_text(ground_truth_csv(scenario))
    queries, truth = query_csv(source, cfg.query_window, cfg.query_stride_generate)
    (args.out / "queries.csv").write_text(queries)
    (args.out / "query_truth.csv").write_text(truth)
    (args.out / "config.json").write_text(json.dumps(cfg.echo(), indent=1, sort_keys=True))
    print(f"wrote {scenario.m} roads, K={scenario.k} to {args.out}")
    return 0


def cmd_build_map(args) -> int:
    cfg = _config(args)
    path = args.data / "dataset.csv" if args.data.is_dir() else args.data
    scenario = parse_dataset(_read(path))
    rm = build_radio_map(scenario, cfg)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(save_map(rm))
    print(f"map: m={rm.m} roads, {sum(r.n_subsegments for r in rm.roads)} sub-segments, N_r={rm.n_r}")
    return 0


def cmd_localize(args) -> int:
    rm = load_map(_read(args.map))
    queries = parse_queries(_read(args.query))
    lines = []
    for qid, signals, spacing in queries:
        if signals.shape[1] != rm.k:
            raise UsageError(f"query {qid} has K={signals.shape[1]}, map has K={rm.k}")
        res = localize_window(extract_window(signals, spacing, signals.shape[0]), rm)
        res.extra["query_id"] = qid
        lines.append(res.to_json())
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text("".join(line + "\n" for line in lines))
    print(f"localized {len(lines)} queries")
    return 0


def cmd_bench(args) -> int:
    from .bench import RunReport, check_report, environment, run_sweep, write_report

    cfg = _config(args)
    sweeps = ["bs_count", "grid_size"] if args.sweep == "both" else [args.sweep]
    points = []
    for s in sweeps:
        points += run_sweep(cfg, s).points
    report = RunReport(points, cfg.echo(), environment())
    for path in write_report(report, args.out):
        print(f"wrote {path}")
    failed = 0
    for c in check_report(report):
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
        failed += not c.passed
    return 1 if failed and not args.no_check else 0


def cmd_inspect(args) -> int:
    rm = load_map(_read(args.map))
    names = feature_names(rm.k)
    print(f"m={rm.m} roads, K={rm.k}, q={rm.q}, N_r={rm.n_r}, window={rm.default_window}")
    for r in rm.roads:
        print(f"road {r.road_id}: {r.n_subsegments} sub-segments, length {r.length:.1f} m, N_s={r.n_s}")
        print(f"  road mask: {', '.join(names[i] for i in r.mask.selected)}")
        for s, m, p in zip(r.subsegments, r.sub_masks, r.priors):
            print(f"  [{s.index}] samples {s.start}-{s.stop}  prior {p:.4f}  mask {', '.join(names[i] for i in m.selected)}")
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "build-map": cmd_build_map,
    "localize": cmd_localize,
    "bench": cmd_bench,
    "inspect": cmd_inspect,
}


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, MapFormatError, DatasetError) as exc:
        print(f"roadloc {args.command}: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any pipeline failure as exit 1
        print(f"roadloc {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
