"""Core signal types and the dataset CSV schema.

Dataset layout (UTF-8, ``.`` decimal separator)::

    road_id,idx,x,y,rsrp_0,...,rsrp_{K-1}

Rows are grouped by road and sorted by ``idx``. Column ``rsrp_0`` is the macro
base station (MBS); the remaining columns are small cells. Lines starting with
``#`` are comments. A comment of the form ``# meta: key=value`` carries scenario
metadata (BS positions, sampling interval, area bounds) so that a serialized
scenario parses back to the same object.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

FLOOR_DBM = -140.0


class DatasetError(ValueError):
    """Raised for malformed dataset files; ``row`` is 1-based when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


@dataclass(frozen=True)
class Position2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite position ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance(self, other: "Position2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def validate_signal_vector(rsrp, k: int | None = None) -> np.ndarray:
    """Return ``rsrp`` as a float64 vector after checking the RSRP invariants."""
    v = np.asarray(rsrp, dtype=np.float64)
    if v.ndim != 1 or v.size < 1:
        raise ValueError("signal vector must be a non-empty 1-D array")
    if k is not None and v.size != k:
        raise ValueError(f"signal vector has {v.size} entries, expected K={k}")
    if not np.all(np.isfinite(v)):
        raise ValueError("signal vector contains non-finite RSRP")
    if np.any(v < FLOOR_DBM) or np.any(v >= 0.0):
        raise ValueError(f"RSRP must lie in [{FLOOR_DBM}, 0) dBm")
    return v


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SignalSequence:
    """Ordered sampling positions along one road and the RSRP seen at each.

    ``positions`` is ``(L, 2)`` in meters, ``rsrp`` is ``(L, K)`` in dBm. Both
    arrays are copied and frozen on construction.
    """

    road_id: str
    positions: np.ndarray
    rsrp: np.ndarray

    def __post_init__(self):
        pos = _readonly(self.positions)
        sig = _readonly(self.rsrp)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValueError("positions must have shape (L, 2)")
        if sig.ndim != 2 or sig.shape[0] != pos.shape[0]:
            raise ValueError("rsrp must have shape (L, K) matching positions")
        if pos.shape[0] < 2:
            raise ValueError(f"road {self.road_id!r}: need L >= 2 samples")
        if sig.shape[1] < 1:
            raise ValueError("K must be >= 1")
        if not np.all(np.isfinite(pos)):
            raise ValueError(f"road {self.road_id!r}: non-finite position")
        gaps = np.hypot(*np.diff(pos, axis=0).T)
        bad = np.flatnonzero(gaps <= 0.0)
        if bad.size:
            raise ValueError(
                f"road {self.road_id!r}: coincident consecutive positions at index {bad[0]}"
            )
        if not np.all(np.isfinite(sig)) or np.any(sig < FLOOR_DBM) or np.any(sig >= 0.0):
            raise ValueError(f"road {self.road_id!r}: RSRP outside [{FLOOR_DBM}, 0) dBm")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "rsrp", sig)

    @property
    def length(self) -> int:
        return self.positions.shape[0]

    @property
    def k(self) -> int:
        return self.rsrp.shape[1]

    def slice(self, start: int, stop: int, road_id: str | None = None) -> "SignalSequence":
        """Samples ``start..stop`` inclusive."""
        return SignalSequence(
            road_id if road_id is not None else self.road_id,
            self.positions[start : stop + 1],
            self.rsrp[start : stop + 1],
        )

    def with_columns(self, columns) -> "SignalSequence":
        return SignalSequence(self.road_id, self.positions, self.rsrp[:, columns])

    def __eq__(self, other):
        if not isinstance(other, SignalSequence):
            return NotImplemented
        return (
            self.road_id == other.road_id
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.rsrp, other.rsrp)
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    k: int
    bs_positions: np.ndarray
    roads: tuple[SignalSequence, ...]
    sampling_interval: float = 1.0
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 600.0, 600.0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        roads = tuple(self.roads)
        object.__setattr__(self, "roads", roads)
        bs = np.asarray(self.bs_positions, dtype=np.float64).reshape(-1, 2)
        bs.setflags(write=False)
        object.__setattr__(self, "bs_positions", bs)
        if self.k < 1:
            raise ValueError("K must be >= 1")
        if bs.shape[0] not in (0, self.k):
            raise ValueError(f"{bs.shape[0]} BS positions given for K={self.k}")
        ids = [r.road_id for r in roads]
        if len(set(ids)) != len(ids):
            raise ValueError("road ids must be unique")
        for r in roads:
            if r.k != self.k:
                raise ValueError(f"road {r.road_id!r} has K={r.k}, scenario K={self.k}")

    @property
    def m(self) -> int:
        return len(self.roads)

    def road(self, road_id: str) -> SignalSequence:
        for r in self.roads:
            if r.road_id == road_id:
                return r
        raise KeyError(road_id)

    def restrict_bs(self, count: int) -> "Scenario":
        """Keep only the first ``count`` BS columns (MBS first)."""
        if not 1 <= count <= self.k:
            raise ValueError(f"bs count {count} outside 1..{self.k}")
        cols = slice(0, count)
        bs = self.bs_positions[cols] if self.bs_positions.size else self.bs_positions
        return Scenario(
            count,
            bs,
            tuple(r.with_columns(cols) for r in self.roads),
            self.sampling_interval,
            self.bounds,
            dict(self.meta),
        )

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.bs_positions, other.bs_positions)
            and self.roads == other.roads
            and self.sampling_interval == other.sampling_interval
            and tuple(self.bounds) == tuple(other.bounds)
        )


def arc_lengths(seq: SignalSequence | np.ndarray) -> np.ndarray:
    """Cumulative Euclidean distance along the sampled positions, starting at 0."""
    pos = seq.positions if isinstance(seq, SignalSequence) else np.asarray(seq, dtype=np.float64)
    steps = np.hypot(*np.diff(pos, axis=0).T)
    return np.concatenate(([0.0], np.cumsum(steps)))


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"non-numeric {column} value {text!r}", row) from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite {column} value {text!r}", row)
    return value


def _parse_meta(line: str, meta: dict) -> None:
    body = line.lstrip("#").strip()
    if not body.startswith("meta:"):
        return
    key, _, value = body[len("meta:") :].strip().partition("=")
    meta[key.strip()] = value.strip()


def parse_dataset(text: str) -> Scenario:
    """Parse the dataset CSV into a :class:`Scenario`.

    RSRP below :data:`FLOOR_DBM` is clamped to the floor. Ragged rows,
    non-numeric fields, duplicate ``(road_id, idx)`` pairs and roads with fewer
    than two rows are rejected with the offending row number.
    """
    meta: dict[str, str] = {}
    header = None
    header_row = 0
    groups: dict[str, list[tuple[int, int, list[float]]]] = {}
    order: list[str] = []
    reader = csv.reader(io.StringIO(text))
    for row_no, fields in enumerate(reader, start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if fields[0].lstrip().startswith("#"):
            _parse_meta(",".join(fields), meta)
            continue
        fields = [f.strip() for f in fields]
        if header is None:
            header, header_row = fields, row_no
            if header[:4] != ["road_id", "idx", "x", "y"] or len(header) < 5:
                raise DatasetError("header must be road_id,idx,x,y,rsrp_0,...", row_no)
            expected = [f"rsrp_{k}" for k in range(len(header) - 4)]
            if header[4:] != expected:
                raise DatasetError(f"RSRP columns must be {','.join(expected)}", row_no)
            continue
        if len(fields) != len(header):
            raise DatasetError(f"expected {len(header)} fields, got {len(fields)}", row_no)
        road_id = fields[0]
        if not road_id:
            raise DatasetError("empty road_id", row_no)
        try:
            idx = int(fields[1])
        except ValueError:
            raise DatasetError(f"non-integer idx {fields[1]!r}", row_no) from None
        values = [_parse_float(v, row_no, name) for v, name in zip(fields[2:], header[2:])]
        if road_id not in groups:
            groups[road_id] = []
            order.append(road_id)
        groups[road_id].append((idx, row_no, values))
    if header is None:
        raise DatasetError("missing header row")

    k = len(header) - 4
    roads = []
    for road_id in order:
        rows = groups[road_id]
        seen: dict[int, int] = {}
        for idx, row_no, _ in rows:
            if idx in seen:
                raise DatasetError(
                    f"duplicate idx {idx} for road {road_id!r} (first at row {seen[idx]})", row_no
                )
            seen[idx] = row_no
        if len(rows) < 2:
            raise DatasetError(f"road {road_id!r} has fewer than 2 samples", rows[0][1])
        rows.sort(key=lambda r: r[0])
        data = np.array([r[2] for r in rows], dtype=np.float64)
        rsrp = np.maximum(data[:, 2:], FLOOR_DBM)
        try:
            roads.append(SignalSequence(road_id, data[:, :2], rsrp))
        except ValueError as exc:
            raise DatasetError(str(exc), rows[0][1]) from None

    bs = np.zeros((0, 2))
    if "bs_positions" in meta:
        pairs = [p for p in meta["bs_positions"].split(";") if p.strip()]
        bs = np.array([[float(c) for c in p.split()] for p in pairs], dtype=np.float64)
    interval = float(meta.get("sampling_interval", 1.0))
    bounds = tuple(float(v) for v in meta["bounds"].split()) if "bounds" in meta else (
        0.0, 0.0, 600.0, 600.0)
    try:
        return Scenario(k, bs, tuple(roads), interval, bounds)
    except ValueError as exc:
        raise DatasetError(str(exc), header_row) from None


def _fmt(v: float) -> str:
    return f"{v:.6f}"


def serialize_dataset(scenario: Scenario) -> str:
    """Inverse of :func:`parse_dataset` (floats written with 6 decimals)."""
    out = io.StringIO()
    if scenario.bs_positions.size:
        pairs = ";".join(f"{_fmt(x)} {_fmt(y)}" for x, y in scenario.bs_positions)
        out.write(f"# meta: bs_positions={pairs}\n")
    out.write(f"# meta: sampling_interval={scenario.sampling_interval!r}\n")
    out.write("# meta: bounds=" + " ".join(repr(float(b)) for b in scenario.bounds) + "\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["road_id", "idx", "x", "y"] + [f"rsrp_{k}" for k in range(scenario.k)])
    for road in scenario.roads:
        for j in range(road.length):
            x, y = road.positions[j]
            writer.writerow([road.road_id, j, _fmt(x), _fmt(y)] + [_fmt(v) for v in road.rsrp[j]])
    return out.getvalue()


def ground_truth_csv(scenario: Scenario) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["road_id", "idx", "x", "y"])
    for road in scenario.roads:
        for j, (x, y) in enumerate(road.positions):
            writer.writerow([road.road_id, j, _fmt(x), _fmt(y)])
    return out.getvalue()
