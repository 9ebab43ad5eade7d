"""Compare the numba and pure-numpy kernels, then a whole run under each path.

Run: python benchmarks/bench_kernels.py [--nodes 20,40,100] [--repeat 2000]

The end-to-end part re-launches the simulator in a subprocess with
MANETSIM_NUMBA=0/1, since the flag is read once at import time.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from manetsim import accel

E2E_SNIPPET = """
import time
from manetsim.scenario import build_scenario
from manetsim.simulation import run
sc = build_scenario({"n_nodes": %d, "horizon": 120.0, "model": "rwp", "traffic": "cbr"})
run(sc)  # warm-up (numba compile / cache load)
t0 = time.perf_counter()
res = run(sc)
print(time.perf_counter() - t0, res.report.received)
"""


def make_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    ox, oy, dx, dy = (rng.uniform(0, 1000, n) for _ in range(4))
    dep = rng.uniform(0, 50, n)
    arr = dep + rng.uniform(1, 100, n)
    return (ox, oy, dx, dy, dep, arr), rng.uniform(0, 1000, (n, 2))


def per_call_us(fn, args, repeat):
    fn(*args)  # compile outside the timed region
    return min(timeit.repeat(lambda: fn(*args), number=repeat, repeat=3)) / repeat * 1e6


def kernel_table(node_counts, repeat):
    print(f"{'kernel':<18}{'n':>5}{'numpy us':>11}{'numba us':>11}{'speedup':>9}")
    for n in node_counts:
        legs, xy = make_inputs(n)
        cases = [
            ("positions_at", accel.numpy_positions_at, accel.numba_positions_at, legs + (30.0,)),
            ("neighbors_within", accel.numpy_neighbors_within, accel.numba_neighbors_within, (xy, 0, 250.0)),
            ("adjacency", accel.numpy_adjacency, accel.numba_adjacency, (xy, 250.0)),
            ("window_speed", accel.numpy_window_mean_speed, accel.numba_window_mean_speed,
             (legs[4], legs[5], np.full(n, 5.0), 0.0, 100.0)),
        ]
        for name, np_fn, nb_fn, args in cases:
            a = per_call_us(np_fn, args, repeat)
            b = per_call_us(nb_fn, args, repeat)
            print(f"{name:<18}{n:>5}{a:>11.2f}{b:>11.2f}{a / b:>8.1f}x")


def end_to_end(n):
    out = {}
    for flag in ("0", "1"):
        env = {**os.environ, "MANETSIM_NUMBA": flag}
        res = subprocess.run([sys.executable, "-c", E2E_SNIPPET % n], env=env, capture_output=True, text=True, check=True)
        secs, received = res.stdout.split()
        out[flag] = (float(secs), int(received))
    if out["0"][1] != out["1"][1]:
        print("WARNING: the two paths delivered different packet counts")
    print(f"\nfull run, {n} nodes, 120 s: numpy {out['0'][0]:.2f} s, numba {out['1'][0]:.2f} s "
          f"({out['0'][0] / out['1'][0]:.2f}x), received={out['1'][1]}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", default="20,40,100")
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--e2e-nodes", type=int, default=20)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    if not accel.NUMBA_ENABLED:
        print("note: numba path disabled for the simulator (MANETSIM_NUMBA); kernels still compared directly")
    kernel_table([int(x) for x in args.nodes.split(",")], args.repeat)
    if not args.skip_e2e:
        end_to_end(args.e2e_nodes)


if __name__ == "__main__":
    main()
