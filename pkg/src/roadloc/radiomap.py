"""Offline radio map: segmentation, salient feature banks, curves and priors.

The map serializes to a schema-versioned JSON document. Floats are written
with ``repr`` precision, so a save/load round trip is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import Config
from .curvefit import SubSegmentCurves, fit_curves
from .features import LAYOUT_VERSION, Q, feature_names, gradients
from .salient import SalientConfig, SelectionMask, build_feature_banks
from .segmentation import SubSegment, bottom_up_segment, build_subsegments
from .signal_model import Position2D, Scenario

SCHEMA = "roadloc.radiomap"
SCHEMA_VERSION = 1


class MapFormatError(ValueError):
    pass


@dataclass(eq=False)
class RoadEntry:
    road_id: str
    boundaries: tuple[int, ...]
    subsegments: list[SubSegment]
    mask: SelectionMask
    features: np.ndarray
    sub_masks: list[SelectionMask]
    sub_features: np.ndarray  # (n_i, qK)
    curves: list[SubSegmentCurves]
    priors: np.ndarray
    length: float

    @property
    def n_subsegments(self) -> int:
        return len(self.subsegments)

    @property
    def n_s(self) -> int:
        return sum(len(m) for m in self.sub_masks)


@dataclass(eq=False)
class RadioMap:
    k: int
    roads: list[RoadEntry]
    config: dict
    q: int = Q
    layout_version: int = LAYOUT_VERSION
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.roads:
            if abs(float(np.sum(r.priors)) - 1.0) > 1e-9:
                raise ValueError(f"priors of road {r.road_id!r} do not sum to 1")
            if not (len(r.curves) == len(r.sub_masks) == r.n_subsegments == len(r.sub_features)):
                raise ValueError(f"road {r.road_id!r}: every sub-segment needs curves and a mask")

    @property
    def m(self) -> int:
        return len(self.roads)

    @property
    def dim(self) -> int:
        return self.q * self.k

    @property
    def n_r(self) -> int:
        return sum(len(r.mask) for r in self.roads)

    def road_index(self, road_id: str) -> int:
        for i, r in enumerate(self.roads):
            if r.road_id == road_id:
                return i
        raise KeyError(road_id)

    @property
    def default_window(self) -> int:
        w = int(self.config.get("window") or 0)
        if w > 0:
            return w
        counts = [s.n_samples for r in self.roads for s in r.subsegments]
        return int(np.median(counts))


def segment_road(seq, cfg: Config) -> tuple[int, ...]:
    g = gradients(seq)
    if g.shape[0] < 2 * cfg.l_min:
        return ()
    return bottom_up_segment(g, cfg.l_min, cfg.penalty(seq.k), criterion=cfg.segment_criterion)


def _priors(subs: list[SubSegment], mode: str) -> np.ndarray:
    if mode == "uniform":
        p = np.ones(len(subs))
    else:
        p = np.array([s.span for s in subs])
    return p / p.sum()


def build_radio_map(scenario: Scenario, cfg: Config) -> RadioMap:
    """Run the full offline pipeline over every road of ``scenario``."""
    boundaries = {r.road_id: segment_road(r, cfg) for r in scenario.roads}
    scfg = SalientConfig(cfg.l_min, cfg.f_max, cfg.bin_width_rsrp, cfg.bin_width_gradient)
    road_bank, sub_banks = build_feature_banks(scenario, boundaries, scfg)
    roads = []
    for seq, road_entry in zip(scenario.roads, road_bank.entries):
        subs, sub_seqs = build_subsegments(seq, boundaries[seq.road_id])
        bank = sub_banks[seq.road_id]
        degree = min(cfg.degree, min(s.length for s in sub_seqs) - 1)
        roads.append(
            RoadEntry(
                seq.road_id,
                boundaries[seq.road_id],
                subs,
                road_entry.mask,
                road_entry.features,
                [e.mask for e in bank.entries],
                np.array([e.features for e in bank.entries]),
                [fit_curves(s, degree) for s in sub_seqs],
                _priors(subs, cfg.prior),
                subs[-1].arc_stop,
            )
        )
    echo = cfg.echo()
    echo["pen"] = cfg.penalty(scenario.k)
    meta = {
        "road_gain_bits": road_bank.gain,
        "road_selection_degenerate": road_bank.degenerate,
        "subsegment_gain_bits": {rid: b.gain for rid, b in sub_banks.items()},
        "subsegment_selection_degenerate": {rid: b.degenerate for rid, b in sub_banks.items()},
    }
    return RadioMap(scenario.k, roads, echo, meta=meta)


def _curves_json(c: SubSegmentCurves) -> dict:
    return {
        "degree": c.degree,
        "coeffs": c.coeffs.tolist(),
        "residual_rms": c.residual_rms.tolist(),
        "knots_t": c.knots_t.tolist(),
        "knots_xy": c.knots_xy.tolist(),
        "arc_length": c.arc_length,
    }


def map_to_json(rm: RadioMap) -> dict:
    return {
        "schema": SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "layout_version": rm.layout_version,
        "k": rm.k,
        "q": rm.q,
        "feature_names": feature_names(rm.k),
        "n_r": rm.n_r,
        "config": rm.config,
        "meta": rm.meta,
        "roads": [
            {
                "road_id": r.road_id,
                "length_m": r.length,
                "singular_points": list(r.boundaries),
                "mask": list(r.mask.selected),
                "features": r.features.tolist(),
                "n_s": r.n_s,
                "subsegments": [
                    {
                        "index": s.index,
                        "start": s.start,
                        "stop": s.stop,
                        "midpoint": [s.midpoint.x, s.midpoint.y],
                        "arc": [s.arc_start, s.arc_stop],
                        "mask": list(m.selected),
                        "features": f.tolist(),
                        "prior": float(p),
                        "curves": _curves_json(c),
                    }
                    for s, m, f, p, c in zip(r.subsegments, r.sub_masks, r.sub_features, r.priors, r.curves)
                ],
            }
            for r in rm.roads
        ],
    }


def save_map(rm: RadioMap) -> str:
    return json.dumps(map_to_json(rm), indent=1)


def _arr(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64)


def map_from_json(doc: dict) -> RadioMap:
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise MapFormatError("not a radio map document")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise MapFormatError(f"unsupported map schema version {doc.get('schema_version')!r}")
    if doc.get("layout_version") != LAYOUT_VERSION:
        raise MapFormatError(
            f"feature layout version {doc.get('layout_version')!r} does not match {LAYOUT_VERSION}"
        )
    try:
        k, q = int(doc["k"]), int(doc["q"])
        if q != Q:
            raise MapFormatError(f"map uses q={q}, this build uses q={Q}")
        dim = q * k
        roads = []
        for r in doc["roads"]:
            subs, masks, feats, priors, curves = [], [], [], [], []
            for s in r["subsegments"]:
                subs.append(
                    SubSegment(r["road_id"], int(s["index"]), int(s["start"]), int(s["stop"]),
                               Position2D(*s["midpoint"]), float(s["arc"][0]), float(s["arc"][1]))
                )
                masks.append(SelectionMask(tuple(s["mask"]), dim))
                feats.append(s["features"])
                priors.append(s["prior"])
                c = s["curves"]
                curves.append(
                    SubSegmentCurves(int(c["degree"]), _arr(c["coeffs"]).reshape(k, -1),
                                     _arr(c["residual_rms"]), _arr(c["knots_t"]),
                                     _arr(c["knots_xy"]).reshape(-1, 2), float(c["arc_length"]))
                )
            roads.append(
                RoadEntry(r["road_id"], tuple(int(b) for b in r["singular_points"]), subs,
                          SelectionMask(tuple(r["mask"]), dim), _arr(r["features"]), masks,
                          _arr(feats).reshape(len(subs), dim), curves, _arr(priors), float(r["length_m"]))
            )
        return RadioMap(k, roads, dict(doc.get("config", {})), q, LAYOUT_VERSION, dict(doc.get("meta", {})))
    except (KeyError, TypeError, IndexError) as exc:
        raise MapFormatError(f"malformed radio map: {exc!r}") from None


def load_map(text: str | bytes) -> RadioMap:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise MapFormatError(f"malformed map JSON at byte {offset}: {exc.msg}") from None
    return map_from_json(doc)
