"""Density sweeps over (mobility model, traffic, node count, seed) and CSV output."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .mobility import Model
from .scenario import build_scenario, echo_scenario
from .simulation import run
from .traffic import TrafficKind

log = logging.getLogger(__name__)

CSV_COLUMNS = ["run_id", "model", "traffic", "n_nodes", "n_sources", "seed", "avg_delay_s",
               "throughput_bps", "pdr", "sent", "received", "dropped", "in_flight", "status"]
METRIC_COLUMNS = ["avg_delay_s", "throughput_bps", "pdr", "sent", "received", "dropped", "in_flight"]
SUMMARY_COLUMNS = ["model", "traffic", "n_nodes", "runs"] + [f"{m}_{s}" for m in METRIC_COLUMNS for s in ("mean", "std")]

DEFAULT_NODE_COUNTS = tuple(range(10, 101, 10))


@dataclass
class SweepSpec:
    base: dict  # typed scenario values, as returned by parse_scenario_text
    node_counts: tuple = DEFAULT_NODE_COUNTS
    models: tuple = (Model.RWP, Model.RD, Model.MBG_SS)
    traffics: tuple = (TrafficKind.CBR, TrafficKind.VBR)
    seeds: int = 10
    first_seed: int | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (self.node_counts and self.models and self.traffics) or self.seeds < 1:
            raise ValueError("sweep needs non-empty node counts, models, traffics and seeds >= 1")
        self.models = tuple(Model.parse(m) for m in self.models)
        self.traffics = tuple(TrafficKind.parse(t) for t in self.traffics)

    @property
    def total_runs(self):
        return len(self.node_counts) * len(self.models) * len(self.traffics) * self.seeds

    def cells(self):
        for model in self.models:
            for traffic in self.traffics:
                for n in self.node_counts:
                    yield model, traffic, n

    def seed_list(self):
        first = self.first_seed if self.first_seed is not None else int(self.base.get("seed", 1))
        return [first + k for k in range(self.seeds)]

    def scenario(self, model, traffic, n, seed):
        values = {**self.base, **self.extra, "model": model, "traffic": traffic, "n_nodes": n, "seed": seed}
        return build_scenario(values)


def run_id(model, traffic, n, seed):
    return f"{Model.parse(model).value}-{TrafficKind.parse(traffic).value}-n{n}-s{seed}"


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _run_cell(job):
    spec, model, traffic, n, seed = job
    rid = run_id(model, traffic, n, seed)
    row = {"run_id": rid, "model": model.value, "traffic": traffic.value, "n_nodes": n, "seed": seed}
    try:
        sc = spec.scenario(model, traffic, n, seed)
        row["n_sources"] = sc.effective_sources
        res = run(sc)
    except Exception as exc:  # a failed run becomes a failed row
        row.update({c: None for c in METRIC_COLUMNS})
        row.setdefault("n_sources", None)
        row["status"] = f"failed: {type(exc).__name__}: {exc}".replace("\n", " ")
        return row
    rep = res.report
    row.update({
        "avg_delay_s": rep.avg_delay,
        "throughput_bps": rep.throughput,
        "pdr": rep.pdr,
        "sent": rep.sent,
        "received": rep.received,
        "dropped": rep.dropped,
        "in_flight": rep.in_flight,
        "status": "ok",
    })
    return row


def _mean_std(values):
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None
    mean = math.fsum(vals) / len(vals)
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return mean, std


def aggregate(rows):
    """Per-cell (mean row, summary dict) in first-appearance cell order."""
    cells = {}
    for r in rows:
        if r["status"] != "ok":
            continue
        cells.setdefault((r["model"], r["traffic"], int(r["n_nodes"])), []).append(r)
    means, summaries = [], []
    for (model, traffic, n), group in cells.items():
        mean_row = {"run_id": f"{model}-{traffic}-n{n}-mean", "model": model, "traffic": traffic,
                    "n_nodes": n, "n_sources": group[0]["n_sources"], "seed": None, "status": "aggregate"}
        summ = {"model": model, "traffic": traffic, "n_nodes": n, "runs": len(group)}
        for col in METRIC_COLUMNS:
            m, s = _mean_std([None if g[col] in (None, "") else float(g[col]) for g in group])
            mean_row[col] = m
            summ[f"{col}_mean"], summ[f"{col}_std"] = m, s
        means.append(mean_row)
        summaries.append(summ)
    return means, summaries


def sweep(spec: SweepSpec, workers=None):
    """Run every (model, traffic, n, seed) combination.

    Returns ``(rows, summaries)``: data rows followed by their cell's mean
    row, cell by cell, plus per-cell mean/std dicts.
    """
    jobs = [(spec, m, t, n, s) for m, t, n in spec.cells() for s in spec.seed_list()]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            data = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        data = [_run_cell(j) for j in jobs]
    failed = [r for r in data if r["status"] != "ok"]
    for r in failed:
        log.warning("run %s failed: %s", r["run_id"], r["status"])
    means, summaries = aggregate(data)
    by_cell = {(m["model"], m["traffic"], m["n_nodes"]): m for m in means}
    out = []
    k = 0
    for model, traffic, n in spec.cells():
        group = data[k:k + spec.seeds]
        k += spec.seeds
        out.extend(group)
        mean = by_cell.get((model.value, traffic.value, n))
        if mean is not None:
            out.append(mean)
    return out, summaries


def rows_to_csv(rows, columns=CSV_COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def read_results_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: results CSV missing column(s): {', '.join(missing)}")
        return list(reader)


def write_sweep(spec, out_dir, workers=None):
    os.makedirs(out_dir, exist_ok=True)
    rows, summaries = sweep(spec, workers)
    with open(os.path.join(out_dir, "results.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
    with open(os.path.join(out_dir, "summary.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(summaries, SUMMARY_COLUMNS))
    # the base configuration that produced this directory, at the first cell
    m, t, n = next(spec.cells())
    echo_scenario(spec.scenario(m, t, n, spec.seed_list()[0]), out_dir)
    with open(os.path.join(out_dir, "sweep.conf"), "w", encoding="utf-8") as fh:
        fh.write(f"nodes = {','.join(map(str, spec.node_counts))}\n")
        fh.write(f"models = {','.join(m.value for m in spec.models)}\n")
        fh.write(f"traffic = {','.join(t.value for t in spec.traffics)}\n")
        fh.write(f"seeds = {','.join(map(str, spec.seed_list()))}\n")
    return rows, summaries
