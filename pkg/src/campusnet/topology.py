"""Three-level network construction: campus LANs, SONET attachment, DWDM ring.

Node ids are hierarchical strings (``<campus>.lan2.ws5``) so that sorted
order, used for routing tie-breaks, is stable and readable.
"""
from __future__ import annotations

import csv
import enum
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property

from .geodesy import Site, site_distance_km
from .mst import SpanningTree


class TopologyError(ValueError):
    pass


class RoutingError(TopologyError):
    """A destination cannot be reached from a source."""


class DeviceKind(enum.Enum):
    WORKSTATION = "workstation"
    ETHERNET_HUB = "ethernet_hub"
    ACCESS_SWITCH = "access_switch"  # Cisco 2900/2924
    CAMPUS_ROUTER = "campus_router"  # Cisco 4500/4700
    SONET_MUX = "sonet_mux"  # Cisco 7609/7650
    DWDM_HUB = "dwdm_hub"  # Cisco ONS 15454 MSTP

    @property
    def is_l2(self) -> bool:
        return self in (DeviceKind.ETHERNET_HUB, DeviceKind.ACCESS_SWITCH)

    @property
    def is_l3(self) -> bool:
        return self in (DeviceKind.CAMPUS_ROUTER, DeviceKind.SONET_MUX, DeviceKind.DWDM_HUB)


class LinkKind(enum.Enum):
    FAST_ETHERNET = ("fast_ethernet", 100_000_000)
    OC12 = ("oc12", 622_080_000)
    OC48 = ("oc48", 2_488_320_000)

    def __init__(self, label, rate_bps):
        self.label = label
        self.rate_bps = rate_bps

    @classmethod
    def from_label(cls, label: str) -> "LinkKind":
        for k in cls:
            if k.label == label:
                return k
        raise ValueError(f"unknown link kind {label!r}")


LINK_ROLES = ("access", "uplink", "primary", "secondary", "backbone")
ACCESS_MODES = ("hub", "switch")


@dataclass(frozen=True)
class Node:
    id: str
    kind: DeviceKind
    site: Site | None = None


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    kind: LinkKind
    length_km: float = 0.0
    role: str = "access"

    def __post_init__(self):
        if self.a == self.b:
            raise TopologyError(f"self-loop link on {self.a!r}")
        if not self.length_km >= 0.0:
            raise TopologyError(f"link {self.a}-{self.b}: negative length {self.length_km}")
        if self.role not in LINK_ROLES:
            raise TopologyError(f"link {self.a}-{self.b}: unknown role {self.role!r}")

    @property
    def key(self) -> frozenset:
        return frozenset((self.a, self.b))

    def other(self, node_id: str) -> str:
        return self.b if node_id == self.a else self.a


@dataclass(frozen=True)
class NetworkModel:
    """Typed nodes and rate-annotated links.

    Fragments may carry links whose far endpoint lives in another fragment;
    ``combine`` joins fragments and enforces that every endpoint exists.
    """

    nodes: tuple = ()
    links: tuple = ()
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        by_id = {}
        for n in self.nodes:
            if n.id in by_id:
                raise TopologyError(f"duplicate node id {n.id!r}")
            by_id[n.id] = n
        object.__setattr__(self, "_by_id", by_id)
        seen = set()
        for link in self.links:
            if link.key in seen:
                raise TopologyError(f"duplicate link {link.a}-{link.b}")
            seen.add(link.key)

    @classmethod
    def combine(cls, *fragments: "NetworkModel") -> "NetworkModel":
        model = cls(
            [n for f in fragments for n in f.nodes], [l for f in fragments for l in f.links]
        )
        for link in model.links:
            for end in (link.a, link.b):
                if end not in model._by_id:
                    raise TopologyError(f"link {link.a}-{link.b}: unknown endpoint {end!r}")
        return model

    def node(self, node_id: str) -> Node:
        return self._by_id[node_id]

    def __contains__(self, node_id) -> bool:
        return node_id in self._by_id

    def of_kind(self, *kinds: DeviceKind) -> list[Node]:
        return [n for n in self.nodes if n.kind in kinds]

    @property
    def workstations(self) -> list[Node]:
        return self.of_kind(DeviceKind.WORKSTATION)

    @cached_property
    def adjacency(self) -> dict[str, list[tuple[str, int]]]:
        """node id -> [(neighbor id, link index)] in link order."""
        adj = {n.id: [] for n in self.nodes}
        for i, link in enumerate(self.links):
            if link.a in adj:
                adj[link.a].append((link.b, i))
            if link.b in adj:
                adj[link.b].append((link.a, i))
        return adj

    def reachable(self, start: str, skip_link: int | None = None) -> set[str]:
        seen, queue = {start}, deque([start])
        while queue:
            u = queue.popleft()
            for v, i in self.adjacency[u]:
                if i != skip_link and v not in seen and v in self._by_id:
                    seen.add(v)
                    queue.append(v)
        return seen

    def router_of(self, site_id: str) -> Node:
        for n in self.nodes:
            if n.kind is DeviceKind.CAMPUS_ROUTER and n.site is not None and n.site.id == site_id:
                return n
        raise TopologyError(f"no campus router for site {site_id!r}")


@dataclass(frozen=True)
class CampusSpec:
    lan_count: int
    hosts_per_lan: int
    access_mode: str = "switch"

    def __post_init__(self):
        if self.lan_count < 1 or self.hosts_per_lan < 1:
            raise TopologyError("lan_count and hosts_per_lan must be >= 1")
        if self.access_mode not in ACCESS_MODES:
            raise TopologyError(f"access_mode must be one of {ACCESS_MODES}")


def build_campus(campus_site: Site, lan_count: int, hosts_per_lan: int, access_mode: str) -> NetworkModel:
    """One campus: workstations on access devices, ring/mesh between access
    devices, a star to the core switch, and a router above the core."""
    CampusSpec(lan_count, hosts_per_lan, access_mode)
    cid = campus_site.id
    fe = LinkKind.FAST_ETHERNET
    access_kind = DeviceKind.ETHERNET_HUB if access_mode == "hub" else DeviceKind.ACCESS_SWITCH
    core = Node(f"{cid}.core", DeviceKind.ACCESS_SWITCH, campus_site)
    router = Node(f"{cid}.router", DeviceKind.CAMPUS_ROUTER, campus_site)
    nodes, links = [core, router], []
    access = []
    for i in range(1, lan_count + 1):
        dev = Node(f"{cid}.lan{i}", access_kind, campus_site)
        access.append(dev)
        nodes.append(dev)
        for j in range(1, hosts_per_lan + 1):
            ws = Node(f"{dev.id}.ws{j}", DeviceKind.WORKSTATION, campus_site)
            nodes.append(ws)
            links.append(Link(ws.id, dev.id, fe, 0.0, "access"))
    if lan_count == 2:
        links.append(Link(access[0].id, access[1].id, fe, 0.0, "secondary"))
    elif lan_count >= 3:
        for i in range(lan_count):
            links.append(Link(access[i].id, access[(i + 1) % lan_count].id, fe, 0.0, "secondary"))
    for dev in access:
        links.append(Link(dev.id, core.id, fe, 0.0, "uplink"))
    links.append(Link(core.id, router.id, fe, 0.0, "uplink"))
    return NetworkModel(nodes, links)


def _campus_router(fragment: NetworkModel) -> Node:
    routers = fragment.of_kind(DeviceKind.CAMPUS_ROUTER)
    if len(routers) != 1:
        raise TopologyError("campus fragment must contain exactly one router")
    return routers[0]


def secondary_links(campuses) -> list[Link]:
    """OC-12 link from each campus router to its nearest other campus.

    Nearest-distance ties go to the campus listed first; a mutual nearest
    pair yields a single link.
    """
    routers = [_campus_router(c) for c in campuses]
    links, seen = [], set()
    for r in routers:
        others = [o for o in routers if o is not r]
        if not others:
            continue
        nearest = min(others, key=lambda o: site_distance_km(r.site, o.site))
        key = frozenset((r.id, nearest.id))
        if key in seen:
            continue
        seen.add(key)
        links.append(Link(r.id, nearest.id, LinkKind.OC12, site_distance_km(r.site, nearest.site), "secondary"))
    return links


def _mux_node(mux_site: Site) -> Node:
    return Node(f"mux.{mux_site.id}", DeviceKind.SONET_MUX, mux_site)


def _primary_links(campuses, mux: Node) -> list[Link]:
    out = []
    for c in campuses:
        r = _campus_router(c)
        out.append(Link(r.id, mux.id, LinkKind.OC12, site_distance_km(r.site, mux.site), "primary"))
    return out


def attach_campuses_to_sonet(campuses, mux_site: Site) -> NetworkModel:
    if not campuses:
        raise TopologyError("need at least one campus")
    mux = _mux_node(mux_site)
    return NetworkModel([mux], _primary_links(campuses, mux) + secondary_links(campuses))


def build_dwdm_backbone(muxes, backbone_plan: SpanningTree) -> NetworkModel:
    """OC-48 logical ring over the muxes in DFS preorder of ``backbone_plan``,
    plus an OC-48 spoke from every mux to the single DWDM hub."""
    if not muxes:
        raise TopologyError("need at least one SONET mux")
    by_site = {m.site.id: m for m in muxes}
    if len(by_site) != len(muxes) or set(backbone_plan.order) != set(by_site):
        raise TopologyError("backbone plan does not span the mux sites")
    ring = [by_site[s] for s in backbone_plan.preorder()]
    oc48 = LinkKind.OC48
    hub = Node("dwdm", DeviceKind.DWDM_HUB, ring[0].site)
    links = []
    if len(ring) >= 2:
        for a, b in zip(ring, ring[1:]):
            links.append(Link(a.id, b.id, oc48, site_distance_km(a.site, b.site), "backbone"))
    if len(ring) >= 3:
        a, b = ring[-1], ring[0]
        links.append(Link(a.id, b.id, oc48, site_distance_km(a.site, b.site), "backbone"))
    for m in ring:
        links.append(Link(m.id, hub.id, oc48, site_distance_km(m.site, hub.site), "backbone"))
    return NetworkModel([hub], links)


def build_network(campuses, mux_groups, backbone_plan: SpanningTree) -> NetworkModel:
    """Assemble the full model.

    ``campuses`` is a list of ``(Site, CampusSpec)``; ``mux_groups`` maps each
    mux ``Site`` to the campus site ids it serves. Secondary links pick the
    nearest campus across the whole build, not just within one mux group,
    so that a mux serving a single campus still leaves it a backup path.
    """
    fragments = {site.id: build_campus(site, spec.lan_count, spec.hosts_per_lan, spec.access_mode)
                 for site, spec in campuses}
    muxes, parts = [], []
    for mux_site, members in mux_groups.items():
        mux = _mux_node(mux_site)
        muxes.append(mux)
        try:
            group = [fragments[cid] for cid in members]
        except KeyError as exc:
            raise TopologyError(f"mux {mux_site.id!r} references unknown campus {exc.args[0]!r}") from None
        parts.append(NetworkModel([mux], _primary_links(group, mux)))
    grouped = [cid for members in mux_groups.values() for cid in members]
    if sorted(grouped) != sorted(fragments):
        raise TopologyError("every campus must belong to exactly one mux group")
    campus_list = list(fragments.values())
    parts.append(NetworkModel([], secondary_links(campus_list)))
    parts.append(build_dwdm_backbone(muxes, backbone_plan))
    return NetworkModel.combine(*campus_list, *parts)


@dataclass
class ValidationReport:
    connected: bool
    unreachable: list[str]
    resilience: list[tuple[Link, list[str]]]  # (removed primary link, stranded workstations)
    resilient: bool
    findings: list[str]
    node_counts: dict[str, int]
    link_counts: dict[str, int]

    def lines(self) -> list[str]:
        out = [f"connected: {'yes' if self.connected else 'no'}",
               f"resilient: {'yes' if self.resilient else 'no'}"]
        out += [f"finding: {f}" for f in self.findings]
        out += [f"nodes.{k}: {v}" for k, v in sorted(self.node_counts.items())]
        out += [f"links.{k}: {v}" for k, v in sorted(self.link_counts.items())]
        return out


def validate_topology(model: NetworkModel) -> ValidationReport:
    findings = []
    unreachable = []
    if model.nodes:
        seen = model.reachable(model.nodes[0].id)
        unreachable = [n.id for n in model.nodes if n.id not in seen]
        for nid in unreachable:
            findings.append(f"node {nid} is not connected to {model.nodes[0].id}")
    connected = not unreachable

    backbone = model.of_kind(DeviceKind.DWDM_HUB) or model.of_kind(DeviceKind.SONET_MUX)
    workstations = [n.id for n in model.workstations]
    resilience = []
    primaries = [(i, l) for i, l in enumerate(model.links) if l.role == "primary"]
    if not backbone:
        findings.append("no backbone node; resilience not assessable")
    for i, link in primaries:
        seen = model.reachable(backbone[0].id, skip_link=i)
        stranded = [w for w in workstations if w not in seen]
        resilience.append((link, stranded))
        if stranded:
            findings.append(
                f"removing primary {link.a}-{link.b} strands {len(stranded)} workstation(s)"
            )
    resilient = bool(backbone) and bool(primaries) and all(not s for _, s in resilience)
    if len(model.of_kind(DeviceKind.CAMPUS_ROUTER)) < 2:
        findings.append("fewer than two campuses: no secondary link exists")
        resilient = False
    return ValidationReport(
        connected=connected,
        unreachable=unreachable,
        resilience=resilience,
        resilient=resilient,
        findings=findings,
        node_counts=dict(Counter(n.kind.value for n in model.nodes)),
        link_counts=dict(Counter(l.kind.label for l in model.links)),
    )


def write_nodes_csv(model: NetworkModel, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "kind", "site_id"])
        for n in model.nodes:
            w.writerow([n.id, n.kind.value, n.site.id if n.site else ""])


def write_links_csv(model: NetworkModel, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_a", "node_b", "link_kind", "length_km", "role"])
        for l in model.links:
            w.writerow([l.a, l.b, l.kind.label, repr(l.length_km), l.role])
