"""Synthetic HetNet scenarios: polyline roads, log-distance path loss, shadowing.

Shadowing is a spatially correlated Gaussian field per BS with exponential
correlation ``exp(-r / shadow_corr)``, realized as a sum of random cosines
whose wave vectors are drawn from the matching 2-D spectral density. The
field can be evaluated at any position, so roads that meet see the same
shadowing there, and a fixed seed reproduces it exactly.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import Config
from .signal_model import FLOOR_DBM, Scenario, SignalSequence, arc_lengths

N_COSINES = 256
GUARD_DISTANCE = 0.5


@dataclass(frozen=True)
class BaseStation:
    index: int
    position: tuple[float, float]
    ptx: float
    exponent: float


@dataclass(frozen=True)
class ChannelParams:
    pl0: float = 40.0
    d0: float = 1.0
    sigma: float = 4.0
    corr_distance: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("shadowing sigma must be >= 0")
        if self.corr_distance < 0:
            raise ValueError("correlation distance must be >= 0")


@dataclass(frozen=True)
class LayoutSpec:
    roads: tuple[np.ndarray, ...]
    base_stations: tuple[BaseStation, ...]
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 600.0, 600.0)
    sampling_interval: float = 1.0
    road_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        roads = tuple(np.asarray(r, dtype=np.float64).reshape(-1, 2) for r in self.roads)
        object.__setattr__(self, "roads", roads)
        if not self.base_stations:
            raise ValueError("layout needs K >= 1 base stations")
        if self.sampling_interval <= 0:
            raise ValueError("sampling interval must be positive")
        x0, y0, x1, y1 = self.bounds
        for i, r in enumerate(roads):
            if r.shape[0] < 2:
                raise ValueError(f"road {i} needs at least two vertices")
            if np.any(r[:, 0] < x0) or np.any(r[:, 0] > x1) or np.any(r[:, 1] < y0) or np.any(r[:, 1] > y1):
                raise ValueError(f"road {i} leaves the area bounds")
        if not self.road_ids:
            object.__setattr__(self, "road_ids", tuple(f"r{i}" for i in range(len(roads))))
        if len(self.road_ids) != len(roads):
            raise ValueError("one road id per road required")

    @property
    def k(self) -> int:
        return len(self.base_stations)


def layout_from_config(cfg: Config) -> LayoutSpec:
    bss = tuple(
        BaseStation(
            i,
            (float(p[0]), float(p[1])),
            cfg.ptx_mbs if i == 0 else cfg.ptx_sbs,
            cfg.exponent_mbs if i == 0 else cfg.exponent_sbs,
        )
        for i, p in enumerate(cfg.bs_positions)
    )
    return LayoutSpec(
        tuple(np.asarray(r, dtype=np.float64) for r in cfg.roads),
        bss,
        (0.0, 0.0, float(cfg.area_width), float(cfg.area_height)),
        float(cfg.sampling_interval),
    )


def channel_from_config(cfg: Config, seed: int | None = None, sigma: float | None = None) -> ChannelParams:
    return ChannelParams(
        pl0=cfg.pl0,
        sigma=cfg.shadow_sigma if sigma is None else sigma,
        corr_distance=cfg.shadow_corr,
        seed=cfg.seed if seed is None else seed,
    )


def _rng(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *[int(k) for k in keys]])


def _shadow(points: np.ndarray, bs: BaseStation, params: ChannelParams) -> np.ndarray:
    if params.sigma == 0.0:
        return np.zeros(points.shape[0])
    if params.corr_distance == 0.0:
        # uncorrelated: one draw per (position, BS), keyed on the position bits
        out = np.empty(points.shape[0])
        for i, p in enumerate(points):
            digest = hashlib.blake2b(np.ascontiguousarray(p).tobytes(), digest_size=8).digest()
            out[i] = _rng(params.seed, bs.index, int.from_bytes(digest, "little")).standard_normal()
        return params.sigma * out
    rng = _rng(params.seed, bs.index)
    u = rng.random(N_COSINES)
    # radial wavenumber of the exp(-r/a) spectrum: F(k) = 1 - (1 + a^2 k^2)^-1/2
    radius = np.sqrt((1.0 - u) ** -2 - 1.0) / params.corr_distance
    theta = rng.uniform(0.0, 2.0 * np.pi, N_COSINES)
    phase = rng.uniform(0.0, 2.0 * np.pi, N_COSINES)
    omega = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    return params.sigma * kernels.shadow_field(np.ascontiguousarray(points, dtype=np.float64), omega, phase)


def rsrp_field(points, bs: BaseStation, params: ChannelParams) -> np.ndarray:
    """Vectorized :func:`rsrp_at` over an ``(N, 2)`` array of positions."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = np.hypot(pts[:, 0] - bs.position[0], pts[:, 1] - bs.position[1])
    d = np.where(d <= 0.0, GUARD_DISTANCE, d)
    path_loss = params.pl0 + 10.0 * bs.exponent * np.log10(d / params.d0)
    return np.maximum(bs.ptx - path_loss - _shadow(pts, bs, params), FLOOR_DBM)


def rsrp_at(pos, bs: BaseStation, params: ChannelParams) -> float:
    """Received power (dBm) from ``bs`` at ``pos``: log-distance loss plus shadowing."""
    return float(rsrp_field(np.asarray(pos, dtype=np.float64)[None, :], bs, params)[0])


def sample_polyline(vertices: np.ndarray, interval: float) -> np.ndarray:
    """Points every ``interval`` meters of arc length along a polyline."""
    seg = np.hypot(*np.diff(vertices, axis=0).T)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    s = np.arange(0.0, cum[-1] + 1e-9, interval)
    return np.column_stack([np.interp(s, cum, vertices[:, 0]), np.interp(s, cum, vertices[:, 1])])


def generate(layout: LayoutSpec, params: ChannelParams) -> Scenario:
    """Sample every road at the layout interval and compute RSRP from every BS.

    Positions in the returned scenario are the ground truth of the traversal.
    """
    roads = []
    for road_id, vertices in zip(layout.road_ids, layout.roads):
        pts = sample_polyline(vertices, layout.sampling_interval)
        rsrp = np.column_stack([rsrp_field(pts, bs, params) for bs in layout.base_stations])
        if np.any(rsrp >= 0.0):
            raise ValueError(f"road {road_id!r} passes too close to a BS: RSRP >= 0 dBm")
        roads.append(SignalSequence(road_id, pts, rsrp))
    bs_pos = np.array([bs.position for bs in layout.base_stations])
    return Scenario(
        layout.k,
        bs_pos,
        tuple(roads),
        layout.sampling_interval,
        layout.bounds,
        {"seed": params.seed, "sigma": params.sigma, "corr_distance": params.corr_distance},
    )


def timestamps(seq: SignalSequence, speed_kmh: float) -> np.ndarray:
    """Seconds since the first sample at constant ``speed_kmh``."""
    return arc_lengths(seq) / (speed_kmh / 3.6)
