"""Queueing sanity check: one switch egress port driven as an M/M/1 queue.

Arrivals are injected straight into the switch ingress (bypassing any
sender NIC queue) with exponential inter-arrival times and exponential,
unclamped frame sizes, so the egress FIFO sees Poisson arrivals and
exponential service at the Fast Ethernet rate.
"""
from __future__ import annotations

from dataclasses import dataclass

from .devices import NetworkSim
from .simcore import SimConfig
from .topology import DeviceKind, Link, LinkKind, NetworkModel, Node
from .traffic import SizeModel


@dataclass(frozen=True)
class MM1Result:
    arrival_rate: float
    service_rate: float
    delivered: int
    mean_sojourn_s: float
    predicted_sojourn_s: float
    mean_queue_len: float
    measured_arrival_rate: float
    mean_wait_s: float

    @property
    def sojourn_rel_error(self) -> float:
        return abs(self.mean_sojourn_s - self.predicted_sojourn_s) / self.predicted_sojourn_s

    @property
    def little_rel_error(self) -> float:
        rhs = self.measured_arrival_rate * self.mean_wait_s
        return abs(self.mean_queue_len - rhs) / rhs


def single_port_model() -> NetworkModel:
    fe = LinkKind.FAST_ETHERNET
    return NetworkModel(
        [Node("src", DeviceKind.WORKSTATION), Node("sw", DeviceKind.ACCESS_SWITCH),
         Node("sink", DeviceKind.WORKSTATION)],
        [Link("src", "sw", fe), Link("sw", "sink", fe)],
    )


def mm1_port_experiment(rho: float = 0.5, frames: int = 100_000, mean_bytes: float = 1500.0,
                        seed: int = 1, warmup_frames: int = 2_000) -> MM1Result:
    rate_bps = LinkKind.FAST_ETHERNET.rate_bps
    mu = rate_bps / (mean_bytes * 8)
    lam = rho * mu
    warmup = warmup_frames / lam
    duration = warmup + 1.03 * frames / lam
    config = SimConfig(duration, warmup, seed, stats_bucket_s=duration, queue_capacity=10_000)
    net = NetworkSim(config, single_port_model())
    rng = net.sim.rng
    sizes = SizeModel.exponential(mean_bytes, clamp=False)
    ingress = net.port_to[("sw", "src")].index
    t = rng.expovariate(lam)
    while t < duration:
        frame = net.new_frame("src", "sink", sizes.draw(rng), t)
        frame.l2_src, frame.l2_dst = "src", "sink"
        net.inject(t, "sw", ingress, frame)
        t += rng.expovariate(lam)
    store = net.run()
    queue = net.port_to[("sw", "sink")].tx.queue
    samples = store.delay_samples
    return MM1Result(
        arrival_rate=lam,
        service_rate=mu,
        delivered=len(samples),
        mean_sojourn_s=sum(samples) / len(samples),
        predicted_sojourn_s=1.0 / (mu - lam),
        mean_queue_len=queue.mean_length(duration),
        measured_arrival_rate=queue.arrivals / (duration - warmup),
        mean_wait_s=queue.mean_wait(),
    )
