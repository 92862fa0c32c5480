"""Scenario documents (YAML) and their assembly into a network model.

Schema::

    sites: sites.csv              # relative to the scenario file
    output_dir: out               # optional, relative to the scenario file
    backbone_start: erbil         # optional mux site id rooting the backbone plan
    sim: {duration_s, warmup_s, seed, stats_bucket_s, queue_capacity}
    campuses:                     # campus site id -> layout
      erbil_univ: {lan_count: 4, hosts_per_lan: 8, access_mode: switch}
    mux_grouping:                 # campus site id -> mux site id (optional)
      erbil_univ: erbil
    traffic:                      # list of profiles
      - preset: heavy             # 80% of Fast Ethernet per LAN
      - {source: all, rate_fps: 50, size: {model: fixed, bytes: 1000},
         dst: uniform, start_s: 0, stop_s: 2}
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .geodesy import Site, load_sites
from .mst import graph_from_sites, prim_mst
from .simcore import SimConfig
from .topology import ACCESS_MODES, CampusSpec, NetworkModel, TopologyError, build_network
from .traffic import SizeModel, TrafficConfigError, TrafficProfile, heavy_load_profiles


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    sites_file: Path
    sites: dict[str, Site]
    campus_specs: dict[str, CampusSpec]
    mux_grouping: dict[str, str]
    traffic: list[TrafficProfile]
    config: SimConfig
    output_dir: Path | None = None
    backbone_start: str | None = None
    raw_traffic: list = field(default_factory=list, repr=False)

    @property
    def access_mode(self) -> str:
        modes = {s.access_mode for s in self.campus_specs.values()}
        return modes.pop() if len(modes) == 1 else "mixed"

    def mux_groups(self) -> dict[Site, list[str]]:
        groups: dict[str, list[str]] = {}
        for cid in self.campus_specs:
            groups.setdefault(self.mux_grouping[cid], []).append(cid)
        return {self.sites[m]: members for m, members in groups.items()}

    def build_model(self) -> NetworkModel:
        groups = self.mux_groups()
        mux_sites = list(groups)
        start = self.backbone_start or mux_sites[0].id
        if start not in {s.id for s in mux_sites}:
            raise ScenarioError(f"backbone_start {start!r} is not a mux site")
        plan = prim_mst(graph_from_sites(mux_sites), start)
        campuses = [(self.sites[cid], spec) for cid, spec in self.campus_specs.items()]
        try:
            return build_network(campuses, groups, plan)
        except TopologyError as exc:
            raise ScenarioError(str(exc)) from None

    def with_overrides(self, access_mode: str | None = None, seed: int | None = None) -> "Scenario":
        sc = self
        if access_mode is not None:
            specs = {cid: replace(s, access_mode=access_mode) for cid, s in sc.campus_specs.items()}
            sc = replace(sc, campus_specs=specs)
            sc = replace(sc, traffic=_profiles(sc.raw_traffic, specs, sc.config))
        if seed is not None:
            sc = replace(sc, config=replace(sc.config, seed=seed))
        return sc


def _section(doc, key, kind, default):
    value = doc.get(key, default)
    if not isinstance(value, kind):
        raise ScenarioError(f"'{key}' must be a {kind.__name__}")
    return value


def _size_model(spec) -> SizeModel:
    if spec is None:
        return SizeModel.fixed(1000)
    if not isinstance(spec, dict):
        raise ScenarioError("traffic size must be a mapping")
    model = spec.get("model", "fixed")
    if model == "fixed":
        return SizeModel.fixed(spec.get("bytes", 1000))
    if model == "exponential":
        return SizeModel.exponential(float(spec.get("mean_bytes", 800)))
    raise ScenarioError(f"unknown size model {model!r}")


def _profiles(raw, specs: dict[str, CampusSpec], config: SimConfig) -> list[TrafficProfile]:
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ScenarioError(f"traffic[{i}] must be a mapping")
        start = float(entry.get("start_s", 0.0))
        stop = float(entry.get("stop_s", config.duration_s))
        try:
            if entry.get("preset") is not None:
                if entry["preset"] != "heavy":
                    raise ScenarioError(f"traffic[{i}]: unknown preset {entry['preset']!r}")
                source = entry.get("source", "all")
                chosen = specs if source == "all" else {source: specs[source]}
                size = _size_model(entry["size"]) if "size" in entry else None
                out.extend(heavy_load_profiles(chosen, size, start, stop))
            else:
                out.append(TrafficProfile(
                    source_set=str(entry.get("source", "all")),
                    rate_fps=float(entry.get("rate_fps", 0.0)),
                    size=_size_model(entry.get("size")),
                    dst=str(entry.get("dst", "uniform")),
                    start_s=start,
                    stop_s=stop,
                ))
        except KeyError as exc:
            raise ScenarioError(f"traffic[{i}]: unknown campus {exc.args[0]!r}") from None
        except (TrafficConfigError, TypeError, ValueError) as exc:
            raise ScenarioError(f"traffic[{i}]: {exc}") from None
    for p in out:
        if p.stop_s > config.duration_s:
            raise ScenarioError(f"traffic stop_s {p.stop_s} exceeds duration_s {config.duration_s}")
        if p.source_set != "all" and p.source_set not in specs:
            raise ScenarioError(f"traffic source {p.source_set!r} is not a campus")
    return out


def load_scenario(path) -> Scenario:
    path = Path(path)
    base = path.parent
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ScenarioError(f"{path}: {exc}".replace("\n", " ")) from None
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: scenario must be a mapping")
    if "sites" not in doc:
        raise ScenarioError(f"{path}: missing 'sites'")
    sites_file = base / str(doc["sites"])
    try:
        sites = {s.id: s for s in load_sites(sites_file)}
    except OSError as exc:
        raise ScenarioError(f"cannot read sites file: {exc}") from None

    sim = _section(doc, "sim", dict, {})
    try:
        config = SimConfig(
            duration_s=float(sim.get("duration_s", 10.0)),
            warmup_s=float(sim.get("warmup_s", 0.0)),
            seed=int(sim.get("seed", 0)),
            stats_bucket_s=float(sim.get("stats_bucket_s", 1.0)),
            queue_capacity=int(sim.get("queue_capacity", 100)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"sim: {exc}") from None

    campuses = _section(doc, "campuses", dict, {})
    if not campuses:
        raise ScenarioError("at least one campus is required")
    specs = {}
    for cid, c in campuses.items():
        if cid not in sites:
            raise ScenarioError(f"campus {cid!r} is not in the sites file")
        if not isinstance(c, dict):
            raise ScenarioError(f"campus {cid!r} must be a mapping")
        mode = c.get("access_mode", "switch")
        if mode not in ACCESS_MODES:
            raise ScenarioError(f"campus {cid!r}: access_mode must be one of {ACCESS_MODES}")
        try:
            specs[cid] = CampusSpec(int(c.get("lan_count", 1)), int(c.get("hosts_per_lan", 1)), mode)
        except (TopologyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"campus {cid!r}: {exc}") from None

    grouping = _section(doc, "mux_grouping", dict, {})
    if not grouping:
        first = next(iter(specs))
        grouping = {cid: first for cid in specs}
    for cid, mux in grouping.items():
        if cid not in specs:
            raise ScenarioError(f"mux_grouping: {cid!r} is not a campus")
        if mux not in sites:
            raise ScenarioError(f"mux_grouping: mux site {mux!r} is not in the sites file")
    missing = [cid for cid in specs if cid not in grouping]
    if missing:
        raise ScenarioError(f"mux_grouping: campus {missing[0]!r} has no mux")

    raw_traffic = _section(doc, "traffic", list, [])
    out_dir = doc.get("output_dir")
    start = doc.get("backbone_start")
    if start is not None and start not in set(grouping.values()):
        raise ScenarioError(f"backbone_start {start!r} is not a mux site")
    return Scenario(
        sites_file=sites_file,
        sites=sites,
        campus_specs=specs,
        mux_grouping={cid: str(m) for cid, m in grouping.items()},
        traffic=_profiles(raw_traffic, specs, config),
        config=config,
        output_dir=base / out_dir if out_dir else None,
        backbone_start=start,
        raw_traffic=raw_traffic,
    )
