"""Compare the numba and pure-numpy kernels.

    python benchmarks/bench_kernels.py [--sizes 50 200 800] [--repeat 5]
    python benchmarks/bench_kernels.py --end-to-end

The kernel section times BFS and unit-capacity max-flow on random digraphs
with each backend and checks that both return identical results.  The
end-to-end section solves a seeded corpus twice in subprocesses, once with
``DILINK_DISABLE_NUMBA=1``.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from dilink import kernels
from dilink.gadgets import gen_random_digraph


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_kernels(sizes, repeat):
    print(f"backend in use: {kernels.BACKEND}")
    print(f"{'n':>6} {'m':>7} {'kernel':>8} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for n in sizes:
        rng = np.random.default_rng(n)
        g = gen_random_digraph(rng, n, min(1.0, 4.0 / n))
        mask = g.full_mask()
        bfs_args = (g.n, g.tails, g.heads, g.out_ptr, g.out_order, mask, 0)
        flow_args = (g.n, g.tails, g.heads, g.out_ptr, g.out_order, g.in_ptr, g.in_order,
                     mask, 0, n - 1, g.m + 1)
        # first call compiles
        kernels.bfs_numba(*bfs_args)
        kernels.max_flow_numba(*flow_args)
        for name, fast, slow, args in (("bfs", kernels.bfs_numba, kernels.bfs_numpy, bfs_args),
                                       ("maxflow", kernels.max_flow_numba,
                                        kernels.max_flow_numpy, flow_args)):
            t_fast, r_fast = best_of(lambda: fast(*args), repeat)
            t_slow, r_slow = best_of(lambda: slow(*args), repeat)
            same = (np.array_equal(r_fast, r_slow) if name == "bfs"
                    else r_fast[0] == r_slow[0] and np.array_equal(r_fast[1], r_slow[1]))
            if not same:
                raise SystemExit(f"backends disagree on {name}, n={n}")
            print(f"{n:>6} {g.m:>7} {name:>8} {t_fast * 1e3:>10.3f} {t_slow * 1e3:>10.3f} "
                  f"{t_slow / max(t_fast, 1e-9):>7.1f}x")


_E2E = """
import time
from dilink.gadgets import gen_random_instance
from dilink.solver import solve_detailed
from dilink import kernels
t0 = time.perf_counter()
yes = 0
for seed in range(120):
    g, q = gen_random_instance(seed, 8 + seed % 8, 0.25, 2, 2)
    yes += solve_detailed(g, q).answer == "YES"
print(kernels.BACKEND, yes, round(time.perf_counter() - t0, 3))
"""


def bench_end_to_end():
    for flag in ("0", "1"):
        env = dict(os.environ, DILINK_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", _E2E], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"backend={out[0]:<6} YES answers={out[1]:>4} wall={out[2]}s (includes JIT warm-up)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800, 3200])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba disabled or missing; both columns time the numpy kernels")
    bench_kernels(args.sizes, args.repeat)
    if args.end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
