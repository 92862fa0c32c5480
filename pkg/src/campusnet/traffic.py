"""Seeded open-loop workloads: Poisson sources, uniform or fixed destinations."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .topology import LinkKind, NetworkModel, RoutingError

FRAME_MIN_BYTES = 64
FRAME_MAX_BYTES = 1518
HEAVY_LOAD_FRACTION = 0.8
HEAVY_MEAN_BYTES = 800.0


class TrafficConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SizeModel:
    """Frame size distribution. ``exponential`` draws are rounded to whole
    bytes and, unless ``clamp`` is off, clamped to Ethernet bounds."""

    kind: str = "fixed"
    bytes: float = 1000.0
    clamp: bool = True

    def __post_init__(self):
        if self.kind not in ("fixed", "exponential"):
            raise TrafficConfigError(f"unknown size model {self.kind!r}")
        if not self.bytes > 0:
            raise TrafficConfigError("frame size must be > 0")

    @classmethod
    def fixed(cls, size: int) -> "SizeModel":
        return cls("fixed", size)

    @classmethod
    def exponential(cls, mean_bytes: float, clamp: bool = True) -> "SizeModel":
        return cls("exponential", mean_bytes, clamp)

    def draw(self, rng) -> int:
        if self.kind == "fixed":
            size = int(round(self.bytes))
        else:
            size = int(round(rng.expovariate(1.0 / self.bytes)))
        if self.clamp:
            size = min(FRAME_MAX_BYTES, max(FRAME_MIN_BYTES, size))
        return size

    @property
    def mean_bytes(self) -> float:
        """Exact mean of ``draw`` (accounts for rounding and clamping)."""
        if self.kind == "fixed":
            size = int(round(self.bytes))
            if self.clamp:
                size = min(FRAME_MAX_BYTES, max(FRAME_MIN_BYTES, size))
            return float(size)
        m = self.bytes
        if not self.clamp:
            return m  # rounding of an exponential is mean-preserving to ~1/(12m)
        lo, hi = FRAME_MIN_BYTES, FRAME_MAX_BYTES

        def cdf(x):
            return 1.0 - math.exp(-x / m) if x > 0 else 0.0

        total = lo * cdf(lo + 0.5) + hi * (1.0 - cdf(hi - 0.5))
        total += math.fsum(k * (cdf(k + 0.5) - cdf(k - 0.5)) for k in range(lo + 1, hi))
        return total


@dataclass(frozen=True)
class TrafficProfile:
    source_set: str = "all"  # "all" or a campus site id
    rate_fps: float = 0.0
    size: SizeModel = SizeModel()
    dst: str = "uniform"  # "uniform" or a workstation id
    start_s: float = 0.0
    stop_s: float = math.inf

    def __post_init__(self):
        if not self.rate_fps >= 0:
            raise TrafficConfigError("rate_fps must be >= 0")
        if not self.start_s < self.stop_s:
            raise TrafficConfigError("start_s must be < stop_s")
        if self.start_s < 0:
            raise TrafficConfigError("start_s must be >= 0")


def next_arrival(profile: TrafficProfile, now: float, rng) -> float:
    """Next Poisson arrival after ``now``; ``math.inf`` for a silent source."""
    if profile.rate_fps <= 0:
        return math.inf
    return now + rng.expovariate(profile.rate_fps)


class Generator:
    __slots__ = ("src", "profile", "candidates")

    def __init__(self, src: str, profile: TrafficProfile, candidates: list[str]):
        self.src = src
        self.profile = profile
        self.candidates = candidates

    def draw_dst(self, rng) -> str:
        if len(self.candidates) == 1:
            return self.candidates[0]
        return self.candidates[rng.randrange(len(self.candidates))]

    def __repr__(self):
        return f"Generator({self.src!r}, rate={self.profile.rate_fps})"


def select_sources(model: NetworkModel, selector: str) -> list[str]:
    ws = model.workstations
    if selector == "all":
        return [n.id for n in ws]
    return [n.id for n in ws if n.site is not None and n.site.id == selector]


def build_flows(model: NetworkModel, profiles) -> list[Generator]:
    """One generator per selected workstation per profile."""
    all_ws = [n.id for n in model.workstations]
    gens = []
    component = {}
    for profile in profiles:
        sources = select_sources(model, profile.source_set)
        if profile.rate_fps > 0 and not sources:
            raise TrafficConfigError(f"source selector {profile.source_set!r} matches no workstation")
        if profile.dst != "uniform":
            if profile.dst not in all_ws:
                raise RoutingError(f"destination {profile.dst!r} is not a workstation in the model")
            sources = [s for s in sources if s != profile.dst]
        for src in sources:
            if profile.dst == "uniform":
                candidates = [w for w in all_ws if w != src]
                if not candidates:
                    raise TrafficConfigError("uniform destinations need at least two workstations")
            else:
                if src not in component:
                    reach = model.reachable(src)
                    for w in reach:
                        component[w] = reach
                if profile.dst not in component[src]:
                    raise RoutingError(f"no route from {src!r} to {profile.dst!r}")
                candidates = [profile.dst]
            gens.append(Generator(src, profile, candidates))
    return gens


def heavy_load_profiles(campus_specs: dict, size: SizeModel | None = None,
                        start_s: float = 0.0, stop_s: float = math.inf) -> list[TrafficProfile]:
    """Per-campus profiles offering 80% of one Fast Ethernet link per LAN.

    ``campus_specs`` maps campus site id to ``CampusSpec``.
    """
    size = size or SizeModel.exponential(HEAVY_MEAN_BYTES)
    per_lan_bps = HEAVY_LOAD_FRACTION * LinkKind.FAST_ETHERNET.rate_bps
    out = []
    for cid, spec in campus_specs.items():
        rate = per_lan_bps / (spec.hosts_per_lan * size.mean_bytes * 8)
        out.append(TrafficProfile(cid, rate, size, "uniform", start_s, stop_s))
    return out
