import csv
import math
import os

import pytest

from manetsim.plots import emit_plots
from manetsim.sweep import CSV_COLUMNS, SweepSpec, read_results_csv, sweep, write_sweep

BASE = {"horizon": 30.0, "traffic_start_min_s": 5.0, "traffic_start_max_s": 10.0}


def test_total_runs_for_full_grid():
    spec = SweepSpec(BASE, node_counts=tuple(range(10, 101, 10)), seeds=10)
    assert spec.total_runs == 600


def test_empty_axes_rejected():
    with pytest.raises(ValueError):
        SweepSpec(BASE, node_counts=())


def test_counting_and_aggregate_mean():
    spec = SweepSpec(BASE, node_counts=(10,), models=("rwp",), traffics=("cbr",), seeds=3)
    rows, summaries = sweep(spec, workers=1)
    data = [r for r in rows if r["status"] == "ok"]
    agg = [r for r in rows if r["status"] == "aggregate"]
    assert len(data) == 3 and len(agg) == 1
    assert [r["seed"] for r in data] == [1, 2, 3]
    for col in ("avg_delay_s", "throughput_bps", "pdr", "sent"):
        vals = [r[col] for r in data]
        assert agg[0][col] == pytest.approx(math.fsum(vals) / 3)
    assert summaries[0]["runs"] == 3


def test_failed_run_becomes_row():
    # start window past the horizon makes every cell invalid
    spec = SweepSpec({**BASE, "traffic_start_min_s": 50.0, "traffic_start_max_s": 60.0},
                     node_counts=(4,), models=("rd",), traffics=("vbr",), seeds=2)
    rows, summaries = sweep(spec, workers=1)
    assert len(rows) == 2 and all(r["status"].startswith("failed") for r in rows)
    assert summaries == []


def test_outputs_and_plots(tmp_path):
    spec = SweepSpec(BASE, node_counts=(6, 8), models=("rwp", "rd"), traffics=("cbr", "vbr"), seeds=2)
    write_sweep(spec, tmp_path, workers=1)
    for name in ("results.csv", "summary.csv", "scenario.resolved.conf", "sweep.conf"):
        assert (tmp_path / name).exists()
    with open(tmp_path / "results.csv") as fh:
        assert fh.readline().strip() == ",".join(CSV_COLUMNS)
    rows = read_results_csv(tmp_path / "results.csv")
    assert len(rows) == spec.total_runs + 8

    paths = emit_plots(tmp_path / "results.csv", tmp_path / "plots")
    assert sorted(os.path.basename(p) for p in paths) == sorted(
        f"{m}_{t}.svg" for m in ("delay", "throughput", "pdr") for t in ("vbr", "cbr"))
    svg = (tmp_path / "plots" / "pdr_cbr.svg").read_text()
    assert svg.count("Random Waypoint") == 1 and svg.count("Random Direction") == 1


def test_plot_schema_mismatch_named(tmp_path):
    bad = tmp_path / "bad.csv"
    with open(bad, "w", newline="") as fh:
        csv.writer(fh).writerow(["run_id", "model"])
    with pytest.raises(ValueError, match="traffic"):
        emit_plots(bad, tmp_path)


def test_parallel_matches_serial():
    spec = SweepSpec(BASE, node_counts=(6,), models=("mbgss",), traffics=("cbr",), seeds=2)
    assert sweep(spec, workers=1)[0] == sweep(spec, workers=2)[0]
