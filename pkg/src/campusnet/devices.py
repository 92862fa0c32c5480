"""Device behaviour: shared-medium hubs, learning switches, routed optical nodes.

Forwarding model
----------------
* Each campus is one layer-2 domain. A workstation addresses frames for its
  own campus directly and frames for other campuses to its campus router.
* Hubs form a single half-duplex medium with one shared FIFO; one frame is
  on the medium at a time and it is repeated to every other port.
* Switches learn source addresses per port, forward to the learned port,
  filter frames whose destination sits behind the ingress port, and flood
  unknown destinations. Ports are independent and full duplex.
* Routers, SONET muxes and the DWDM hub forward along static shortest-hop
  routes after a fixed processing delay.
* Redundant links between layer-2 access devices (the campus ring/mesh) are
  kept in the model but carry no traffic: without a spanning-tree protocol a
  looped layer-2 domain would flood forever.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .metrics import MetricsStore
from .simcore import ConservationError, EventKind, SimConfig, Simulator
from .topology import DeviceKind, Link, LinkKind, NetworkModel, RoutingError
from .traffic import build_flows, next_arrival

PROPAGATION_M_PER_S = 2.0e8
L3_PROCESSING_S = 10e-6
DEFAULT_QUEUE_CAPACITY = 100
HUB_RATE_BPS = LinkKind.FAST_ETHERNET.rate_bps


def transmission_time_s(size_bytes: int, rate_bps: int) -> float:
    return size_bytes * 8 / rate_bps


def propagation_s(link: Link) -> float:
    return link.length_km * 1000.0 / PROPAGATION_M_PER_S


def link_delay_s(link: Link, size_bytes: int) -> float:
    return transmission_time_s(size_bytes, link.kind.rate_bps) + propagation_s(link)


@dataclass
class Frame:
    frame_id: int
    src: str
    dst: str
    size_bytes: int
    created_at: float
    delivered_at: float | None = None
    hop_count: int = 0
    l2_src: str | None = None
    l2_dst: str | None = None

    def copy(self) -> "Frame":
        return Frame(self.frame_id, self.src, self.dst, self.size_bytes, self.created_at,
                     self.delivered_at, self.hop_count, self.l2_src, self.l2_dst)


class PortQueue:
    """Drop-tail FIFO that also keeps Little's-law bookkeeping from ``stats_from``."""

    __slots__ = ("capacity", "queued", "drops", "stats_from", "area", "_last_t",
                 "arrivals", "wait_sum", "waits")

    def __init__(self, capacity: int = DEFAULT_QUEUE_CAPACITY, stats_from: float = 0.0):
        self.capacity = capacity
        self.queued = deque()
        self.drops = 0
        self.stats_from = stats_from
        self.area = 0.0
        self._last_t = stats_from
        self.arrivals = 0
        self.wait_sum = 0.0
        self.waits = 0

    def __len__(self):
        return len(self.queued)

    def _advance(self, now: float) -> None:
        if now > self._last_t:
            self.area += len(self.queued) * (now - self._last_t)
            self._last_t = now

    def push(self, item, now: float) -> bool:
        if len(self.queued) >= self.capacity:
            self.drops += 1
            return False
        self._advance(now)
        self.queued.append((now, item))
        if now >= self.stats_from:
            self.arrivals += 1
        return True

    def pop(self, now: float):
        self._advance(now)
        t_in, item = self.queued.popleft()
        if t_in >= self.stats_from:
            self.wait_sum += now - t_in
            self.waits += 1
        return item

    def close(self, now: float) -> None:
        self._advance(now)

    def mean_length(self, now: float) -> float:
        self.close(now)
        return self.area / (now - self.stats_from)

    def mean_wait(self) -> float:
        return self.wait_sum / self.waits if self.waits else 0.0


class MacTable:
    __slots__ = ("entries",)

    def __init__(self):
        self.entries: dict[str, int] = {}

    def learn(self, addr: str, port: int) -> None:
        self.entries[addr] = port

    def lookup(self, addr: str) -> int | None:
        return self.entries.get(addr)


def compute_routes(model: NetworkModel) -> dict[tuple[str, str], str]:
    """Static shortest-hop next hops ``(node, dst workstation) -> next node``.

    Ties between equal-length paths go to the smallest next-hop node id.
    """
    adj = {n: sorted({v for v, _ in nbrs}) for n, nbrs in model.adjacency.items()}
    table = {}
    for dst in (w.id for w in model.workstations):
        dist = {dst: 0}
        frontier = deque([dst])
        while frontier:
            u = frontier.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    frontier.append(v)
        for n in model.nodes:
            if n.id == dst:
                continue
            if n.id not in dist:
                raise RoutingError(f"no route from {n.id!r} to {dst!r}")
            d = dist[n.id]
            table[(n.id, dst)] = next(v for v in adj[n.id] if dist.get(v) == d - 1)
    return table


class Port:
    __slots__ = ("node", "index", "link_index", "link", "direction", "peer", "peer_port", "tx")

    def __init__(self, node, index, link_index, link, peer):
        self.node = node
        self.index = index
        self.link_index = link_index
        self.link = link
        self.direction = 0 if node == link.a else 1
        self.peer = peer
        self.peer_port = None
        self.tx = None  # OutPort or HubSegment carrying frames leaving this port


class OutPort:
    """Full-duplex transmitter on one direction of one link."""

    __slots__ = ("port", "queue", "busy", "current", "tx_start", "name")

    def __init__(self, port: Port, queue: PortQueue):
        self.port = port
        self.queue = queue
        self.busy = False
        self.current = None
        self.tx_start = 0.0
        self.name = f"{port.node}->{port.peer}"


class HubSegment:
    """The single shared medium of one hub and every link attached to it."""

    __slots__ = ("hub", "ports", "queue", "busy", "current", "tx_start", "name")

    def __init__(self, hub: str, ports: list[Port], queue: PortQueue):
        self.hub = hub
        self.ports = ports
        self.queue = queue
        self.busy = False
        self.current = None  # (ingress hub port index, frame)
        self.tx_start = 0.0
        self.name = f"hub:{hub}"


def is_standby(link: Link, model: NetworkModel) -> bool:
    return (link.role == "secondary" and model.node(link.a).kind.is_l2
            and model.node(link.b).kind.is_l2)


class NetworkSim:
    """One simulation run over a ``NetworkModel``."""

    def __init__(self, config: SimConfig, model: NetworkModel, traffic=(), *, trace: bool = False):
        self.config = config
        self.model = model
        self.sim = Simulator(config.seed)
        if trace:
            self.sim.trace = []
        self.tx_log: list[tuple[str, float, float, int]] | None = [] if trace else None
        self.metrics = MetricsStore(config.warmup_s, config.duration_s, config.stats_bucket_s,
                                    model.links)
        self.kind = {n.id: n.kind for n in model.nodes}
        self.routes = compute_routes(model) if model.workstations else {}
        self._build_ports()
        self.mac = {n.id: MacTable() for n in model.nodes if n.kind is DeviceKind.ACCESS_SWITCH}
        self.gateway = {}
        routers = {n.site.id: n.id for n in model.of_kind(DeviceKind.CAMPUS_ROUTER) if n.site}
        for w in model.workstations:
            self.gateway[w.id] = routers.get(w.site.id) if w.site else None
        self.campus = {w.id: (w.site.id if w.site else None) for w in model.workstations}

        self._next_frame_id = 0
        self._live: dict[int, int] = {}
        self._delivered: set[int] = set()

        for p in traffic:
            if p.stop_s != math.inf and p.stop_s > config.duration_s:
                raise ValueError(f"traffic stop_s {p.stop_s} exceeds duration {config.duration_s}")
        self.generators = build_flows(model, traffic)

        s = self.sim
        s.on(EventKind.FRAME_ARRIVAL, self._on_arrival)
        s.on(EventKind.TRANSMIT_START, self._on_transmit_start)
        s.on(EventKind.TRANSMIT_END, self._on_transmit_end)
        s.on(EventKind.GENERATOR_FIRE, self._on_generator)
        s.on(EventKind.STATS_FLUSH, self._on_flush)

    # -- construction -----------------------------------------------------

    def _build_ports(self) -> None:
        model = self.model
        cap = self.config.queue_capacity
        warm = self.config.warmup_s
        self.ports: dict[str, list[Port]] = {n.id: [] for n in model.nodes}
        for i, link in enumerate(model.links):
            if is_standby(link, model):
                continue
            pa = Port(link.a, len(self.ports[link.a]), i, link, link.b)
            self.ports[link.a].append(pa)
            pb = Port(link.b, len(self.ports[link.b]), i, link, link.a)
            self.ports[link.b].append(pb)
            pa.peer_port, pb.peer_port = pb.index, pa.index
        self.port_to = {
            (node, p.peer): p for node, plist in self.ports.items() for p in plist
        }
        self.segments: dict[str, HubSegment] = {}
        for n in model.of_kind(DeviceKind.ETHERNET_HUB):
            self.segments[n.id] = HubSegment(n.id, self.ports[n.id], PortQueue(cap, warm))
        self.transmitters = []
        for node, plist in self.ports.items():
            for p in plist:
                if self.kind[node] is DeviceKind.ETHERNET_HUB:
                    continue  # the hub's own output is its segment
                if self.kind[p.peer] is DeviceKind.ETHERNET_HUB:
                    p.tx = self.segments[p.peer]
                else:
                    p.tx = OutPort(p, PortQueue(cap, warm))
                    self.transmitters.append(p.tx)
        self.transmitters.extend(self.segments.values())

    # -- frame lifecycle --------------------------------------------------

    def new_frame(self, src: str, dst: str, size_bytes: int, now: float) -> Frame:
        fid = self._next_frame_id
        self._next_frame_id += 1
        frame = Frame(fid, src, dst, size_bytes, now)
        self._live[fid] = 1
        self.metrics.record_generated(frame)
        return frame

    def _copy(self, frame: Frame, extra: int) -> None:
        self._live[frame.frame_id] += extra

    def _release(self, frame: Frame) -> None:
        fid = frame.frame_id
        left = self._live[fid] - 1
        if left:
            self._live[fid] = left
            return
        del self._live[fid]
        if fid in self._delivered:
            self._delivered.discard(fid)
        else:
            self.metrics.record_drop()

    def inject(self, time: float, node: str, port_index: int, frame: Frame) -> None:
        """Hand ``frame`` to ``node`` as if it finished arriving on ``port_index``."""
        self.sim.schedule(time, EventKind.FRAME_ARRIVAL, (node, port_index, frame))

    # -- transmission -----------------------------------------------------

    def send(self, port: Port, frame: Frame) -> None:
        tx = port.tx
        if isinstance(tx, HubSegment):
            self.hub_broadcast(tx.hub, port.peer_port, frame)
            return
        if not tx.queue.push(frame, self.sim.now):
            self.metrics.copies_dropped += 1
            self._release(frame)
            return
        if not tx.busy:
            tx.busy = True
            self.sim.schedule(self.sim.now, EventKind.TRANSMIT_START, tx)

    def hub_broadcast(self, hub: str, ingress: int, frame: Frame) -> None:
        """Queue ``frame`` on the hub's shared medium; it is repeated to every
        port except ``ingress`` once it has been transmitted."""
        seg = self.segments[hub]
        if not seg.queue.push((ingress, frame), self.sim.now):
            self.metrics.copies_dropped += 1
            self._release(frame)
            return
        if not seg.busy:
            seg.busy = True
            self.sim.schedule(self.sim.now, EventKind.TRANSMIT_START, seg)

    def _on_transmit_start(self, ev) -> None:
        tx = ev.payload
        now = self.sim.now
        item = tx.queue.pop(now)
        tx.current = item
        tx.tx_start = now
        m = self.metrics
        if isinstance(tx, HubSegment):
            ingress, frame = item
            end = now + transmission_time_s(frame.size_bytes, HUB_RATE_BPS)
            for p in tx.ports:
                toward_hub = p.index == ingress
                m.record_transmission(p.link_index, 1 - p.direction if toward_hub else p.direction,
                                      now, end, count=toward_hub)
        else:
            frame = item
            port = tx.port
            end = now + transmission_time_s(frame.size_bytes, port.link.kind.rate_bps)
            m.record_transmission(port.link_index, port.direction, now, end)
        if self.tx_log is not None:
            self.tx_log.append((tx.name, now, end, frame.frame_id))
        self.sim.schedule(end, EventKind.TRANSMIT_END, tx)

    def _on_transmit_end(self, ev) -> None:
        tx = ev.payload
        now = self.sim.now
        item, tx.current = tx.current, None
        if isinstance(tx, HubSegment):
            ingress, frame = item
            frame.hop_count += 1
            outs = [p for p in tx.ports if p.index != ingress]
            if not outs:
                self._release(frame)
            else:
                self._copy(frame, len(outs) - 1)
                lead = propagation_s(tx.ports[ingress].link)
                for k, p in enumerate(outs):
                    f = frame if k == 0 else frame.copy()
                    self._arrive_later(p, f, now + lead)
        else:
            frame = item
            frame.hop_count += 1
            self._arrive_later(tx.port, frame, now)
        if tx.queue.queued:
            self.sim.schedule(now, EventKind.TRANSMIT_START, tx)
        else:
            tx.busy = False

    def _arrive_later(self, port: Port, frame: Frame, t: float) -> None:
        t += propagation_s(port.link)
        if self.kind[port.peer].is_l3:
            t += L3_PROCESSING_S
        self.sim.schedule(t, EventKind.FRAME_ARRIVAL, (port.peer, port.peer_port, frame))

    # -- reception and forwarding ----------------------------------------

    def _on_arrival(self, ev) -> None:
        node, ingress, frame = ev.payload
        kind = self.kind[node]
        if kind is DeviceKind.WORKSTATION:
            self._receive(node, frame)
        elif kind is DeviceKind.ACCESS_SWITCH:
            self.switch_forward(node, ingress, frame)
        elif kind is DeviceKind.ETHERNET_HUB:
            self.hub_broadcast(node, ingress, frame)
        else:
            self._route(node, ingress, frame)

    def _receive(self, node: str, frame: Frame) -> None:
        if frame.dst == node and frame.frame_id not in self._delivered:
            frame.delivered_at = self.sim.now
            self._delivered.add(frame.frame_id)
            self.metrics.record_delivery(frame)
        self._release(frame)

    def switch_forward(self, node: str, ingress: int, frame: Frame) -> None:
        table = self.mac[node]
        table.learn(frame.l2_src, ingress)
        out = table.lookup(frame.l2_dst)
        ports = self.ports[node]
        if out is not None:
            if out == ingress:
                self._release(frame)  # destination is behind the ingress port
            else:
                self.send(ports[out], frame)
            return
        outs = [p for p in ports if p.index != ingress]
        if not outs:
            self._release(frame)
            return
        self._copy(frame, len(outs) - 1)
        for k, p in enumerate(outs):
            self.send(p, frame if k == 0 else frame.copy())

    def _route(self, node: str, ingress: int, frame: Frame) -> None:
        kind = self.kind
        if kind[node] is DeviceKind.CAMPUS_ROUTER and ingress is not None:
            came_from = self.ports[node][ingress].peer
            if kind[came_from].is_l2 and frame.l2_dst != node:
                self._release(frame)  # flooded copy meant for another station
                return
        nxt = self.routes[(node, frame.dst)]
        if kind[nxt].is_l2:
            frame.l2_src = node
            frame.l2_dst = frame.dst
        self.send(self.port_to[(node, nxt)], frame)

    # -- traffic ----------------------------------------------------------

    def _on_generator(self, ev) -> None:
        gen = ev.payload
        now = self.sim.now
        rng = self.sim.rng
        profile = gen.profile
        size = profile.size.draw(rng)
        dst = gen.draw_dst(rng)
        frame = self.new_frame(gen.src, dst, size, now)
        self.emit(gen.src, frame)
        t = next_arrival(profile, now, rng)
        if t < profile.stop_s:
            self.sim.schedule(t, EventKind.GENERATOR_FIRE, gen)

    def emit(self, ws: str, frame: Frame) -> None:
        frame.l2_src = ws
        same = self.campus.get(frame.dst) == self.campus.get(ws)
        frame.l2_dst = frame.dst if same or self.gateway.get(ws) is None else self.gateway[ws]
        self.send(self.ports[ws][0], frame)

    # -- run --------------------------------------------------------------

    def _on_flush(self, ev) -> None:
        for tx in self.transmitters:
            tx.queue.close(self.sim.now)

    def in_flight_frames(self) -> set[int]:
        """Frame ids physically present in queues, on a medium, or in a pending
        arrival, excluding frames already delivered."""
        ids = set()
        for tx in self.transmitters:
            items = [item for _, item in tx.queue.queued]
            if tx.current is not None:
                items.append(tx.current)
            for item in items:
                frame = item[1] if isinstance(tx, HubSegment) else item
                ids.add(frame.frame_id)
        for ev in self.sim._heap:
            if ev.kind is EventKind.FRAME_ARRIVAL:
                ids.add(ev.payload[2].frame_id)
        return ids - self._delivered

    def run(self) -> MetricsStore:
        cfg = self.config
        for gen in self.generators:
            t = next_arrival(gen.profile, gen.profile.start_s, self.sim.rng)
            if t < gen.profile.stop_s:
                self.sim.schedule(t, EventKind.GENERATOR_FIRE, gen)
        self.sim.schedule(cfg.duration_s, EventKind.STATS_FLUSH)
        self.sim.run_until(cfg.duration_s)
        m = self.metrics
        in_flight = self.in_flight_frames()
        m.frames_in_flight = len(in_flight)
        tracked = {fid for fid in self._live if fid not in self._delivered}
        if in_flight != tracked or not m.conservation_holds():
            raise ConservationError(
                f"generated={m.frames_generated} delivered={m.frames_delivered} "
                f"dropped={m.frames_dropped} in_flight={m.frames_in_flight} "
                f"(tracked {len(tracked)})"
            )
        return m
