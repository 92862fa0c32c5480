"""Deterministic discrete-event engine.

Events dispatch in ``(time, seq)`` order where ``seq`` is assigned at
scheduling, so simultaneous events run in the order they were scheduled.
"""
from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass
from typing import Any, Callable, NamedTuple


class SchedulingError(RuntimeError):
    """An event was scheduled before the current clock."""


class ConservationError(RuntimeError):
    """Frame accounting does not balance at the end of a run."""


class EventKind(enum.Enum):
    FRAME_ARRIVAL = "frame_arrival"
    TRANSMIT_START = "transmit_start"
    TRANSMIT_END = "transmit_end"
    GENERATOR_FIRE = "generator_fire"
    STATS_FLUSH = "stats_flush"


class Event(NamedTuple):
    # heap entries are the events themselves; (time, seq) is unique so
    # comparison never reaches ``kind`` or ``payload``
    time: float
    seq: int
    kind: EventKind
    payload: Any = None


@dataclass(frozen=True)
class SimConfig:
    duration_s: float
    warmup_s: float = 0.0
    seed: int = 0
    stats_bucket_s: float = 1.0
    queue_capacity: int = 100

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError("duration_s must be > 0")
        if not 0 <= self.warmup_s < self.duration_s:
            raise ValueError("warmup_s must be in [0, duration_s)")
        if not self.stats_bucket_s > 0:
            raise ValueError("stats_bucket_s must be > 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.queue_capacity < 1:
            raise ValueError("queue_capacity must be >= 1")


class Simulator:
    """Event queue plus virtual clock plus the run's single random stream."""

    def __init__(self, seed: int = 0):
        self.now = 0.0
        self.rng = random.Random(seed)
        self._heap: list[Event] = []
        self._seq = 0
        self._handlers: dict[EventKind, Callable[[Event], None]] = {}
        self.dispatched = 0
        self.trace: list[Event] | None = None

    def on(self, kind: EventKind, handler: Callable[[Event], None]) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if time < self.now:
            raise SchedulingError(f"event {kind.value} at t={time!r} precedes clock t={self.now!r}")
        ev = Event(time, self._seq, kind, payload)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pending(self) -> int:
        return len(self._heap)

    def run_until(self, end_time: float) -> None:
        """Dispatch every event with ``time <= end_time``; later ones stay queued."""
        heap = self._heap
        handlers = self._handlers
        while heap and heap[0][0] <= end_time:
            ev = heapq.heappop(heap)
            self.now = ev.time
            self.dispatched += 1
            if self.trace is not None:
                self.trace.append(ev)
            handlers[ev.kind](ev)


def run(config: SimConfig, model, traffic=(), *, trace: bool = False):
    """Simulate ``model`` under ``traffic`` and return its ``MetricsStore``.

    Raises ``ConservationError`` if generated frames do not equal delivered
    plus dropped plus in flight at the end.
    """
    from .devices import NetworkSim

    sim = NetworkSim(config, model, traffic, trace=trace)
    return sim.run()
