"""Run metrics: counters, per-frame delay samples, bucketed series, summaries.

Series cover ``[warmup, duration]`` in buckets of ``bucket_s``; the last
bucket may be partial and its rate values use its true width, so
``sum(value * width)`` recovers the raw count.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass


class MetricsError(ValueError):
    pass


class MetricKind(enum.Enum):
    DELAY = "delay"  # mean end-to-end delay of frames delivered in the bucket, s
    LOAD = "load"  # delivered bits / s
    THROUGHPUT = "throughput"  # delivered frames / s
    PACKET_RATE = "packet_rate"  # completed link transmissions / s, all links
    TRAFFIC_SENT = "traffic_sent"  # generated frames / s
    TRAFFIC_RECEIVED = "traffic_received"  # delivered frames / s
    UTILIZATION = "utilization"  # busiest link direction in the bucket, [0, 1]


@dataclass(frozen=True)
class Summary:
    n: int
    min: float
    max: float
    avg: float
    variance: float
    stddev: float


def summarize(samples) -> Summary:
    """min/max/mean with the n-1 sample variance (0 for a single sample)."""
    xs = [float(x) for x in samples]
    n = len(xs)
    if n == 0:
        raise MetricsError("cannot summarize an empty sample")
    lo, hi = min(xs), max(xs)
    avg = min(hi, max(lo, math.fsum(xs) / n))
    variance = math.fsum((x - avg) ** 2 for x in xs) / (n - 1) if n > 1 else 0.0
    return Summary(n, lo, hi, avg, variance, math.sqrt(variance))


@dataclass(frozen=True)
class StatSeries:
    kind: MetricKind
    bucket_s: float
    starts: tuple
    widths: tuple
    values: tuple

    def __len__(self):
        return len(self.values)

    def integral(self) -> float:
        return math.fsum(v * w for v, w in zip(self.values, self.widths))


class MetricsStore:
    def __init__(self, warmup_s: float, duration_s: float, bucket_s: float, links=()):
        self.warmup_s = warmup_s
        self.duration_s = duration_s
        self.bucket_s = bucket_s
        self.links = tuple(links)
        self._link_index = {l.key: i for i, l in enumerate(self.links)}
        starts = []
        k = 0
        while True:
            t = round(warmup_s + k * bucket_s, 12)
            if t >= duration_s:
                break
            starts.append(t)
            k += 1
        self.bucket_starts = tuple(starts)
        self.bucket_widths = tuple(
            min(bucket_s, duration_s - t) for t in starts
        )
        nb = len(starts)
        self._generated = [0] * nb
        self._delivered = [0] * nb
        self._delivered_bits = [0] * nb
        self._delay_sum = [0.0] * nb
        self._tx_done = [0] * nb
        self._busy_bucket: dict[tuple[int, int], list[float]] = {}
        self._busy_total: dict[tuple[int, int], float] = {}

        self.frames_generated = 0
        self.bits_generated = 0
        self.frames_delivered = 0
        self.bits_delivered = 0
        self.frames_dropped = 0
        self.copies_dropped = 0
        self.frames_in_flight = 0
        self.delay_samples: list[float] = []

    def _bucket(self, t: float) -> int | None:
        if t < self.warmup_s or t > self.duration_s or not self.bucket_starts:
            return None
        return min(int((t - self.warmup_s) / self.bucket_s), len(self.bucket_starts) - 1)

    def record_generated(self, frame) -> None:
        self.frames_generated += 1
        self.bits_generated += frame.size_bytes * 8
        b = self._bucket(frame.created_at)
        if b is not None:
            self._generated[b] += 1

    def record_delivery(self, frame) -> None:
        if frame.delivered_at is None or frame.created_at is None:
            raise MetricsError(f"frame {frame.frame_id} delivered without timestamps")
        delay = frame.delivered_at - frame.created_at
        self.frames_delivered += 1
        self.bits_delivered += frame.size_bytes * 8
        b = self._bucket(frame.delivered_at)
        if b is not None:
            self.delay_samples.append(delay)
            self._delivered[b] += 1
            self._delivered_bits[b] += frame.size_bytes * 8
            self._delay_sum[b] += delay

    def record_drop(self) -> None:
        self.frames_dropped += 1

    def record_transmission(self, link_index: int, direction: int, start: float, end: float,
                            count: bool = True) -> None:
        """Busy interval on one direction of a link; ``count`` adds it to the
        packet-rate tally at its completion time."""
        if count:
            b = self._bucket(end)
            if b is not None:
                self._tx_done[b] += 1
        lo, hi = max(start, self.warmup_s), min(end, self.duration_s)
        if hi <= lo:
            return
        key = (link_index, direction)
        self._busy_total[key] = self._busy_total.get(key, 0.0) + (hi - lo)
        per = self._busy_bucket.get(key)
        if per is None:
            per = self._busy_bucket[key] = [0.0] * len(self.bucket_starts)
        b = self._bucket(lo)
        while b is not None and b < len(per) and lo < hi:
            edge = min(hi, self.bucket_starts[b] + self.bucket_widths[b])
            if edge > lo:
                per[b] += edge - lo
                lo = edge
            b += 1

    @property
    def window_s(self) -> float:
        return self.duration_s - self.warmup_s

    def conservation_holds(self) -> bool:
        return self.frames_generated == (
            self.frames_delivered + self.frames_dropped + self.frames_in_flight
        )

    def counters(self) -> dict:
        return {
            "frames_generated": self.frames_generated,
            "bits_generated": self.bits_generated,
            "frames_delivered": self.frames_delivered,
            "bits_delivered": self.bits_delivered,
            "frames_dropped": self.frames_dropped,
            "copies_dropped": self.copies_dropped,
            "frames_in_flight": self.frames_in_flight,
        }


def _rate(counts, widths):
    return tuple(c / w for c, w in zip(counts, widths))


def series(kind, store: MetricsStore) -> StatSeries:
    try:
        kind = MetricKind(kind) if not isinstance(kind, MetricKind) else kind
    except ValueError:
        raise MetricsError(f"unknown metric kind {kind!r}") from None
    widths = store.bucket_widths
    if kind is MetricKind.DELAY:
        values = tuple(s / n if n else 0.0 for s, n in zip(store._delay_sum, store._delivered))
    elif kind is MetricKind.LOAD:
        values = _rate(store._delivered_bits, widths)
    elif kind in (MetricKind.THROUGHPUT, MetricKind.TRAFFIC_RECEIVED):
        values = _rate(store._delivered, widths)
    elif kind is MetricKind.PACKET_RATE:
        values = _rate(store._tx_done, widths)
    elif kind is MetricKind.TRAFFIC_SENT:
        values = _rate(store._generated, widths)
    else:
        values = tuple(
            max((per[b] / widths[b] for per in store._busy_bucket.values()), default=0.0)
            for b in range(len(widths))
        )
    return StatSeries(kind, store.bucket_s, store.bucket_starts, widths, values)


def link_utilization(link, store: MetricsStore) -> float:
    """Busy fraction of the measured window, the busier direction of ``link``."""
    idx = link if isinstance(link, int) else store._link_index[link.key]
    busy = max(store._busy_total.get((idx, d), 0.0) for d in (0, 1))
    return busy / store.window_s


def metric_summary(kind: MetricKind, store: MetricsStore) -> Summary | None:
    """Delay summarizes per-frame samples; other metrics summarize their series."""
    if kind is MetricKind.DELAY:
        return summarize(store.delay_samples) if store.delay_samples else None
    s = series(kind, store)
    return summarize(s.values) if len(s) else None


SERIES_HEADER = ["metric", "bucket_start_s", "value"]
SUMMARY_HEADER = ["metric", "n", "min", "max", "avg", "variance", "stddev"]


def write_series_csv(store: MetricsStore, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for kind in MetricKind:
            s = series(kind, store)
            for t, v in zip(s.starts, s.values):
                w.writerow([kind.value, repr(t), repr(v)])


def write_summary_csv(store: MetricsStore, path) -> None:
    """One row per metric; a metric with no samples is written with n=0 and zeros."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_HEADER)
        for kind in MetricKind:
            s = metric_summary(kind, store)
            if s is None:
                w.writerow([kind.value, 0, 0.0, 0.0, 0.0, 0.0, 0.0])
            else:
                w.writerow([kind.value, s.n] + [repr(x) for x in (s.min, s.max, s.avg, s.variance, s.stddev)])


def write_utilization_csv(store: MetricsStore, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_a", "node_b", "link_kind", "utilization"])
        for i, l in enumerate(store.links):
            w.writerow([l.a, l.b, l.kind.label, repr(link_utilization(i, store))])
