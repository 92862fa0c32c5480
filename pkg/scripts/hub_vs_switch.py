"""Compare a hub campus and a switch campus under the heavy-load preset.

    python scripts/hub_vs_switch.py --lans 4 --hosts 8 --duration 2 --seed 2013
"""
import argparse

from campusnet.geodesy import GeoPoint, Site
from campusnet.metrics import MetricKind, metric_summary
from campusnet.simcore import SimConfig, run
from campusnet.topology import CampusSpec, build_campus
from campusnet.traffic import heavy_load_profiles


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lans", type=int, default=4)
    ap.add_argument("--hosts", type=int, default=8)
    ap.add_argument("--duration", type=float, default=2.0)
    ap.add_argument("--warmup", type=float, default=0.5)
    ap.add_argument("--bucket", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=2013)
    args = ap.parse_args()

    site = Site("erbil", "Erbil", "campus", GeoPoint(36.19, 44.01))
    config = SimConfig(args.duration, args.warmup, args.seed, args.bucket)
    print(f"{'mode':<8}{'delay_ms':>12}{'thru_fps':>12}{'load_Mbps':>12}{'dropped':>10}")
    for mode in ("hub", "switch"):
        spec = CampusSpec(args.lans, args.hosts, mode)
        store = run(config, build_campus(site, args.lans, args.hosts, mode),
                    heavy_load_profiles({site.id: spec}, stop_s=args.duration))
        delay = metric_summary(MetricKind.DELAY, store).avg * 1e3
        thru = metric_summary(MetricKind.THROUGHPUT, store).avg
        load = metric_summary(MetricKind.LOAD, store).avg / 1e6
        print(f"{mode:<8}{delay:>12.4f}{thru:>12.1f}{load:>12.3f}{store.counters()['frames_dropped']:>10}")


if __name__ == "__main__":
    main()
