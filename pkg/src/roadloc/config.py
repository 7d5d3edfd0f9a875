"""Flat key-value configuration shared by every subcommand.

The file format is TOML restricted to top-level keys, e.g.::

    l_min = 10
    shadow_sigma = 4.0
    roads = [[[40, 60], [560, 60]], [[560, 100], [560, 540]]]

Unknown keys are rejected. :meth:`Config.echo` returns every resolved value so
outputs can record the exact settings they were produced with.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

DEFAULT_ROADS = (
    ((40.0, 60.0), (300.0, 60.0), (560.0, 120.0)),
    ((540.0, 180.0), (540.0, 540.0)),
    ((500.0, 560.0), (260.0, 520.0), (60.0, 560.0)),
    ((60.0, 500.0), (100.0, 280.0), (60.0, 120.0)),
)
DEFAULT_BS = (
    (210.0, 330.0),  # MBS
    (150.0, 20.0),
    (480.0, 300.0),
    (380.0, 590.0),
    (15.0, 380.0),
    (330.0, 180.0),
)


@dataclass
class Config:
    # offline map construction
    l_min: int = 10
    pen: float | None = None  # None -> 0.25 * K
    segment_criterion: str = "sse"  # "sse" or "variance"
    f_max: int = 4
    bin_width_rsrp: float = 2.0
    bin_width_gradient: float = 0.2
    degree: int = 3
    window: int = 0  # 0 -> median sub-segment sample count of the map
    prior: str = "length"  # "length" or "uniform"

    # layout
    area_width: float = 600.0
    area_height: float = 600.0
    sampling_interval: float = 1.0
    speed_kmh: float = 30.0
    roads: list = field(default_factory=lambda: [list(map(list, r)) for r in DEFAULT_ROADS])
    bs_positions: list = field(default_factory=lambda: [list(p) for p in DEFAULT_BS])

    # channel
    ptx_mbs: float = 46.0
    ptx_sbs: float = 30.0
    exponent_mbs: float = 3.0
    exponent_sbs: float = 3.5
    pl0: float = 40.0
    shadow_sigma: float = 4.0
    shadow_corr: float = 20.0
    seed: int = 0

    # baselines
    grid_size: float = 2.0
    rwknn_k: int = 3
    cfels_step: float = 0.1

    # benchmark
    methods: list = field(default_factory=lambda: ["proposed", "rwknn", "gift", "cfels"])
    bs_counts: list = field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    grid_sizes: list = field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0])
    trials: int = 1
    query_stride: int = 1
    timing_repeats: int = 5

    # query file written by `generate`
    query_window: int = 30
    query_stride_generate: int = 10

    def __post_init__(self):
        if self.l_min < 1:
            raise ValueError("l_min must be >= 1")
        if self.f_max < 1:
            raise ValueError("f_max must be >= 1")
        if self.bin_width_rsrp <= 0 or self.bin_width_gradient <= 0:
            raise ValueError("bin widths must be positive")
        if self.segment_criterion not in ("sse", "variance"):
            raise ValueError("segment_criterion must be 'sse' or 'variance'")
        if self.prior not in ("length", "uniform"):
            raise ValueError("prior must be 'length' or 'uniform'")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")
        if self.sampling_interval <= 0:
            raise ValueError("sampling_interval must be positive")
        if not self.bs_positions:
            raise ValueError("need at least one BS")
        if self.timing_repeats < 1:
            raise ValueError("timing_repeats must be >= 1")

    @property
    def k(self) -> int:
        return len(self.bs_positions)

    def penalty(self, k: int) -> float:
        return 0.25 * k if self.pen is None else float(self.pen)

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def echo(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, data: dict) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ValueError(f"config key {key!r}: nested tables are not allowed")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ValueError(f"{path}: {exc}") from None
        return cls.from_mapping(data)


def parse_override(text: str):
    """Parse a ``key=value`` command-line override using TOML value syntax."""
    key, sep, value = text.partition("=")
    if not sep:
        raise ValueError(f"override {text!r} is not key=value")
    try:
        parsed = tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value
    return key.strip(), parsed
