"""Command line pipeline: plan -> build -> simulate -> report.

Exit codes: 0 ok, 2 bad input (parse, config, missing or corrupt files),
3 planning failure (duplicate ids, unknown start, disconnected graph),
4 topology validation failure, 5 engine fault.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .geodesy import DuplicateSiteError, SiteError, load_sites
from .metrics import SUMMARY_HEADER, MetricKind, write_series_csv, write_summary_csv, write_utilization_csv
from .mst import GraphError, graph_from_sites, prim_mst
from .scenario import ScenarioError, load_scenario
from .simcore import ConservationError, run
from .topology import TopologyError, validate_topology, write_links_csv, write_nodes_csv
from .traffic import TrafficConfigError

STATS = ("min", "max", "avg", "variance", "stddev")


class CliError(Exception):
    def __init__(self, code: int, reason: str):
        super().__init__(reason)
        self.code = code


def _load_scenario(args):
    try:
        sc = load_scenario(args.scenario)
    except DuplicateSiteError as exc:
        raise CliError(3, str(exc)) from None
    except (ScenarioError, SiteError) as exc:
        raise CliError(2, str(exc)) from None
    try:
        return sc.with_overrides(access_mode=args.access_mode, seed=getattr(args, "seed", None))
    except (ScenarioError, ValueError) as exc:
        raise CliError(2, str(exc)) from None


def _out_dir(args, sc) -> Path:
    out = Path(args.out) if args.out else (sc.output_dir or Path("."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build(sc):
    try:
        return sc.build_model()
    except (ScenarioError, TopologyError) as exc:
        raise CliError(2, str(exc)) from None


def cmd_plan(args) -> int:
    try:
        sites = load_sites(args.sites)
    except DuplicateSiteError as exc:
        raise CliError(3, str(exc)) from None
    except (SiteError, OSError) as exc:
        raise CliError(2, str(exc)) from None
    if not sites:
        raise CliError(2, f"{args.sites}: no sites")
    start = args.start or sites[0].id
    try:
        tree = prim_mst(graph_from_sites(sites), start)
    except GraphError as exc:
        raise CliError(3, str(exc)) from None
    rows = [(u, v, repr(w)) for u, v, w in tree.edges]
    print(f"MST from {start}: {len(rows)} edge(s)")
    for u, v, w in tree.edges:
        print(f"  {u} -- {v}  {w:.3f} km")
    print(f"total {tree.total_weight:.3f} km")
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["u", "v", "weight_km"])
            w.writerows(rows)
            w.writerow(["TOTAL", "", repr(tree.total_weight)])
    return 0


def cmd_build(args) -> int:
    sc = _load_scenario(args)
    model = _build(sc)
    out = _out_dir(args, sc)
    write_nodes_csv(model, out / "nodes.csv")
    write_links_csv(model, out / "links.csv")
    report = validate_topology(model)
    (out / "validation.txt").write_text("\n".join(report.lines()) + "\n", encoding="utf-8")
    for line in report.lines():
        print(line)
    if not report.connected:
        raise CliError(4, f"topology is disconnected: {', '.join(report.unreachable[:5])}")
    return 0


def cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    model = _build(sc)
    try:
        store = run(sc.config, model, sc.traffic)
    except ConservationError as exc:
        raise CliError(5, f"conservation violated: {exc}") from None
    except (TopologyError, TrafficConfigError, ValueError) as exc:
        raise CliError(2, str(exc)) from None
    out = _out_dir(args, sc)
    write_series_csv(store, out / "series.csv")
    write_summary_csv(store, out / "summary.csv")
    write_utilization_csv(store, out / "utilization.csv")
    with open(out / "run.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["key", "value"])
        w.writerow(["access_mode", sc.access_mode])
        w.writerow(["seed", sc.config.seed])
        for k, v in store.counters().items():
            w.writerow([k, v])
    c = store.counters()
    print(f"{sc.access_mode}: generated {c['frames_generated']} delivered {c['frames_delivered']} "
          f"dropped {c['frames_dropped']} in flight {c['frames_in_flight']} -> {out}")
    return 0


def _read_run(run_dir: Path) -> tuple[str, dict]:
    label = run_dir.name
    meta = run_dir / "run.csv"
    summary = run_dir / "summary.csv"
    try:
        if meta.exists():
            with meta.open(newline="", encoding="utf-8") as fh:
                rows = {r["key"]: r["value"] for r in csv.DictReader(fh)}
            label = rows.get("access_mode", label)
        with summary.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames != SUMMARY_HEADER:
                raise ValueError("unexpected header")
            stats = {}
            for r in reader:
                MetricKind(r["metric"])
                stats[r["metric"]] = {k: float(r[k]) for k in ("n",) + STATS}
    except FileNotFoundError as exc:
        raise CliError(2, f"missing metrics file {exc.filename}") from None
    except (KeyError, ValueError, TypeError, csv.Error) as exc:
        raise CliError(2, f"corrupt metrics file {summary}: {exc}") from None
    return label, stats


def cmd_report(args) -> int:
    runs = [_read_run(Path(d)) for d in args.run_dirs]
    labels = [label for label, _ in runs]
    if len(set(labels)) != len(labels):
        labels = [f"{label}:{Path(d).name}" for label, d in zip(labels, args.run_dirs)]
    metrics = [k.value for k in MetricKind]
    header = ["metric", "stat"] + labels
    rows = []
    for m in metrics:
        for stat in STATS:
            rows.append([m, stat] + [repr(stats.get(m, {}).get(stat, 0.0)) for _, stats in runs])
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="campusnet", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="Prim MST over the sites file")
    plan.add_argument("--sites", required=True)
    plan.add_argument("--start", help="root site id (default: first site)")
    plan.add_argument("--out", help="plan CSV path")
    plan.set_defaults(func=cmd_plan)

    for name, func, text in (("build", cmd_build, "write node/link tables and validation"),
                             ("simulate", cmd_simulate, "run the scenario and write metrics")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--scenario", required=True)
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--access-mode", choices=("hub", "switch"))
        if name == "simulate":
            sp.add_argument("--seed", type=int)
        sp.set_defaults(func=func)

    rep = sub.add_parser("report", help="side-by-side summary of run directories")
    rep.add_argument("run_dirs", nargs="+")
    rep.add_argument("--out", help="comparison CSV path")
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        reason = str(exc).replace("\n", " ")
        print(f"error: {args.command}: exit={exc.code}: {reason}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
