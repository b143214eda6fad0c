"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 60]
"""

import argparse
import timeit

import numpy as np

from majdyn import _fallback
from majdyn.dynamics import sample_async_schedule
from majdyn.graph import torus_graph

try:
    from majdyn import _kernels
except ImportError:
    _kernels = None


def cases(size):
    g = torus_graph(size, size)
    rng = np.random.default_rng(0)
    c = rng.choice(np.array([-1, 1], dtype=np.int8), size=g.n)
    sched = sample_async_schedule(g, 3.0, 1)
    short = sample_async_schedule(g, 1.0, 2)
    return {
        "neighbor_sums": lambda k: k.neighbor_sums(g.indptr, g.indices, c),
        "sync_step": lambda k: k.sync_step(g.indptr, g.indices, c),
        "sync_run": lambda k: k.sync_run(g.indptr, g.indices, c, g.m + 3),
        "async_run": lambda k: k.async_run(g.indptr, g.indices, c.copy(), sched.vertices, False),
        "cone_backward": lambda k: k.cone_backward(g.indptr, g.indices, 0, short.vertices),
    }


def best(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=60, help="torus side length")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback can be timed")
    print(f"torus({args.size},{args.size}) with self-loops")
    print(f"{'kernel':<15}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, run in cases(args.size).items():
        t_py = best(lambda: run(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:<15}{t_py * 1e3:>14.3f}{'-':>14}{'-':>10}")
            continue
        t_cy = best(lambda: run(_kernels), args.repeat)
        print(f"{name:<15}{t_py * 1e3:>14.3f}{t_cy * 1e3:>14.3f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
