import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campusnet.simcore import SimConfig, run
from campusnet.topology import CampusSpec, NetworkModel, Node, Link, RoutingError, DeviceKind
from campusnet.traffic import (
    FRAME_MAX_BYTES, FRAME_MIN_BYTES, SizeModel, TrafficConfigError, TrafficProfile,
    build_flows, heavy_load_profiles, next_arrival,
)
from helpers import FE, WS, campus


def test_silent_source():
    assert next_arrival(TrafficProfile(rate_fps=0), 1.0, random.Random(0)) == math.inf


def test_mean_interarrival():
    rng = random.Random(42)
    p = TrafficProfile(rate_fps=100)
    gaps = [next_arrival(p, 0.0, rng) for _ in range(100_000)]
    assert sum(gaps) / len(gaps) == pytest.approx(0.01, rel=0.02)


def test_seeded_arrivals_repeat():
    p = TrafficProfile(rate_fps=50)

    def first10(seed):
        rng, t, out = random.Random(seed), 0.0, []
        for _ in range(10):
            t = next_arrival(p, t, rng)
            out.append(t)
        return out

    assert first10(7) == first10(7)


def test_all_selector_one_generator_per_host():
    gens = build_flows(campus("switch", 4, 10), [TrafficProfile("all", 10)])
    assert len(gens) == 40


def test_uniform_never_picks_source():
    gens = build_flows(campus("switch", 2, 3), [TrafficProfile("all", 10)])
    rng = random.Random(1)
    g = gens[0]
    assert all(g.draw_dst(rng) != g.src for _ in range(100_000))


def test_unmatched_selector():
    with pytest.raises(TrafficConfigError):
        build_flows(campus("switch", 1, 2), [TrafficProfile("nowhere", 10)])


def test_fixed_destination_unreachable():
    m = NetworkModel([Node("a", WS), Node("s", DeviceKind.ACCESS_SWITCH), Node("b", WS), Node("z", WS)],
                     [Link("a", "s", FE), Link("b", "s", FE)])
    with pytest.raises(RoutingError):
        build_flows(m, [TrafficProfile("all", 1, dst="z")])
    with pytest.raises(RoutingError):
        build_flows(m, [TrafficProfile("all", 1, dst="nope")])


def test_profile_invariants():
    with pytest.raises(TrafficConfigError):
        TrafficProfile(rate_fps=-1)
    with pytest.raises(TrafficConfigError):
        TrafficProfile(start_s=2, stop_s=1)


@settings(max_examples=50)
@given(st.floats(1, 5000), st.integers(0, 2**32))
def test_sizes_within_ethernet_bounds(mean, seed):
    rng = random.Random(seed)
    m = SizeModel.exponential(mean)
    assert all(FRAME_MIN_BYTES <= m.draw(rng) <= FRAME_MAX_BYTES for _ in range(200))


@pytest.mark.parametrize("mean", [300.0, 800.0, 1500.0])
def test_clamped_mean_matches_monte_carlo(mean):
    rng = random.Random(3)
    m = SizeModel.exponential(mean)
    draws = [m.draw(rng) for _ in range(200_000)]
    assert sum(draws) / len(draws) == pytest.approx(m.mean_bytes, rel=0.01)


def test_heavy_preset_offers_80_percent_per_lan():
    spec = CampusSpec(4, 8)
    (p,) = heavy_load_profiles({"erbil": spec})
    assert spec.hosts_per_lan * p.rate_fps * p.size.mean_bytes * 8 == pytest.approx(0.8 * FE.rate_bps)


def test_offered_load_converges():
    rng = random.Random(5)
    p = TrafficProfile(rate_fps=1000, size=SizeModel.exponential(700))
    t, bits, horizon = 0.0, 0, 200.0
    while True:
        t = next_arrival(p, t, rng)
        if t >= horizon:
            break
        bits += p.size.draw(rng) * 8
    assert bits / horizon == pytest.approx(p.rate_fps * p.size.mean_bytes * 8, rel=0.02)


def test_offered_load_in_simulation():
    specs = {"erbil": CampusSpec(2, 4)}
    profiles = heavy_load_profiles(specs, stop_s=1.0)
    store = run(SimConfig(1.0, seed=8), campus("switch", 2, 4), profiles)
    expected = 8 * profiles[0].rate_fps * profiles[0].size.mean_bytes * 8
    assert store.bits_generated / 1.0 == pytest.approx(expected, rel=0.02)
