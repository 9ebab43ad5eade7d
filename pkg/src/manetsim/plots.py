"""Metric-vs-node-count line charts from a sweep's results CSV."""

import os
import statistics
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .sweep import read_results_csv  # noqa: E402

METRICS = {
    "delay": ("avg_delay_s", "End-to-end delay (s)"),
    "throughput": ("throughput_bps", "Throughput (bit/s)"),
    "pdr": ("pdr", "Packet delivery ratio"),
}
MODEL_LABELS = {"rwp": "Random Waypoint", "rd": "Random Direction", "mbgss": "Mobgen Steady-State", "static": "Static"}
TRAFFICS = ("vbr", "cbr")


def cell_stats(rows, column):
    """{(traffic, model): [(n, mean, std), ...]} over successful data rows."""
    groups = defaultdict(list)
    for r in rows:
        if r["status"] != "ok" or r[column] == "":
            continue
        groups[(r["traffic"], r["model"], int(r["n_nodes"]))].append(float(r[column]))
    out = defaultdict(list)
    for (traffic, model, n), vals in sorted(groups.items()):
        std = statistics.stdev(vals) if len(vals) > 1 else 0.0
        out[(traffic, model)].append((n, statistics.fmean(vals), std))
    return out


def emit_plots(csv_path, out_dir):
    rows = read_results_csv(csv_path)
    os.makedirs(out_dir, exist_ok=True)
    models = sorted({r["model"] for r in rows if r["status"] == "ok"})
    written = []
    for name, (column, label) in METRICS.items():
        stats = cell_stats(rows, column)
        for traffic in TRAFFICS:
            fig, ax = plt.subplots(figsize=(6, 4))
            for model in models:
                pts = stats.get((traffic, model), [])
                if not pts:
                    continue
                xs, ys, es = zip(*pts)
                ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=MODEL_LABELS.get(model, model))
            ax.set_xlabel("Number of nodes")
            ax.set_ylabel(label)
            ax.set_title(f"{label.split(' (')[0]} vs. number of nodes ({traffic.upper()})")
            ax.grid(alpha=0.3)
            if ax.lines:
                ax.legend()
            path = os.path.join(out_dir, f"{name}_{traffic}.svg")
            fig.savefig(path, metadata={"Date": None})
            plt.close(fig)
            written.append(path)
    return written
