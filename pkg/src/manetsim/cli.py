import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, replace

from . import ns2trace
from .kernel import RngStream
from .mobility import Model, plan_tracks
from .scenario import ScenarioError, echo_scenario, load_scenario, parse_scenario_text
from .simulation import Simulation
from .sweep import CSV_COLUMNS, SweepSpec, rows_to_csv, write_sweep


def parse_nodes(text):
    """``10..100:10`` (inclusive range with step) or ``10,20,40``."""
    if ".." in text:
        span, _, step = text.partition(":")
        lo, hi = (int(x) for x in span.split(".."))
        step = int(step) if step else 1
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad node range {text!r}")
        return tuple(range(lo, hi + 1, step))
    return tuple(int(x) for x in text.split(",") if x.strip())


def _csv_list(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


def cmd_run(args):
    sc = load_scenario(args.config)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    echo_scenario(sc, args.out)
    sim = Simulation(sc)
    rep = sim.run()
    with open(os.path.join(args.out, "records.csv"), "w", encoding="utf-8") as fh:
        fh.write(sim.ledger.dump_csv())
    with open(os.path.join(args.out, "report.json"), "w", encoding="utf-8") as fh:
        json.dump({"fingerprint": sc.fingerprint(), "seed": sc.seed, **asdict(rep)}, fh, indent=2, default=str)
    row = {"run_id": f"{sc.mobility.model.value}-{sc.traffic.value}-n{sc.n_nodes}-s{sc.seed}",
           "model": sc.mobility.model.value, "traffic": sc.traffic.value, "n_nodes": sc.n_nodes,
           "n_sources": sc.effective_sources, "seed": sc.seed, "avg_delay_s": rep.avg_delay,
           "throughput_bps": rep.throughput, "pdr": rep.pdr, "sent": rep.sent, "received": rep.received,
           "dropped": rep.dropped, "in_flight": rep.in_flight, "status": "ok"}
    with open(os.path.join(args.out, "results.csv"), "w", encoding="utf-8") as fh:
        fh.write(rows_to_csv([row], CSV_COLUMNS))
    delay = "n/a" if rep.avg_delay is None else f"{rep.avg_delay:.6f} s"
    pdr = "n/a" if rep.pdr is None else f"{rep.pdr:.4f}"
    print(f"sent={rep.sent} received={rep.received} dropped={rep.dropped} in_flight={rep.in_flight} "
          f"delay={delay} throughput={rep.throughput:.1f} bit/s pdr={pdr}")
    return 0


def cmd_sweep(args):
    with open(args.config, encoding="utf-8") as fh:
        base = parse_scenario_text(fh.read())
    spec = SweepSpec(base, node_counts=args.nodes, models=args.models, traffics=args.traffic, seeds=args.seeds)
    logging.info("sweep: %d runs", spec.total_runs)
    rows, _ = write_sweep(spec, args.out, workers=args.workers)
    failed = sum(1 for r in rows if r["status"].startswith("failed"))
    print(f"{spec.total_runs} runs, {failed} failed -> {os.path.join(args.out, 'results.csv')}")
    return 1 if failed else 0


def cmd_plot(args):
    from .plots import emit_plots

    for path in emit_plots(args.csv, args.out):
        print(path)
    return 0


def cmd_trace(args):
    sc = load_scenario(args.config)
    if args.seed is not None:
        sc = replace(sc, seed=args.seed)
    if sc.mobility.model is Model.STATIC and not sc.positions:
        raise ScenarioError("static model needs explicit positions for a trace")
    mob = RngStream(sc.seed).fork("mobility")
    tracks = plan_tracks(sc.n_nodes, sc.mobility, sc.area, mob, sc.horizon, sc.positions or None)
    text = ns2trace.export_ns2_trace(tracks, sc.horizon)
    if os.path.dirname(args.out):
        os.makedirs(os.path.dirname(args.out), exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"{len(tracks)} nodes, {text.count('setdest')} setdest lines -> {args.out}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="manetsim", description="OLSR MANET simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="single simulation run")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="node-density sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--nodes", type=parse_nodes, default=tuple(range(10, 101, 10)))
    s.add_argument("--models", type=_csv_list, default=("rwp", "rd", "mbgss"))
    s.add_argument("--traffic", type=_csv_list, default=("cbr", "vbr"))
    s.add_argument("--seeds", type=int, default=10)
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    pl = sub.add_parser("plot", help="charts from a results CSV")
    pl.add_argument("--csv", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    t = sub.add_parser("trace", help="export NS-2 movement trace")
    t.add_argument("--config", required=True)
    t.add_argument("--seed", type=int)
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_trace)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
