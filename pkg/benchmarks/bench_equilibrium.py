"""Time the best-response solver on both backends.

    python3 benchmarks/bench_equilibrium.py --services 6 24 96 --repeat 20
"""

import argparse
import statistics
import time

import numpy as np

from harshnet.game import GameConfig, initial_profile, random_gains
from harshnet.game import kernels


def time_backend(name, cfg, p0, repeat):
    solve = kernels.get_solver(name)
    args = (cfg.gains, cfg.weights, cfg.bandwidth, cfg.sigma2, cfg.p_max, cfg.lam, p0, cfg.eps, 200)
    solve(*args)  # warm-up
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = solve(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--services", type=int, nargs="+", default=[6, 24, 96])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {kernels.BACKEND})")
    print(f"{'L':>5} {'iters':>6} " + " ".join(f"{b + ' ms':>12}" for b in backends) + f" {'speedup':>8}")
    for n in args.services:
        cfg = GameConfig(random_gains(n, args.seed, dominance=3.0), bandwidth=3.5, sigma2=0.001, lam=20.0)
        p0 = initial_profile(cfg, args.seed)
        res = {b: time_backend(b, cfg, p0, args.repeat) for b in backends}
        iters = next(iter(res.values()))[1][1]
        if len(res) > 1:
            a, b = (res[k][1][0] for k in backends[:2])
            assert np.array_equal(a, b), "backends disagree"
        ms = [1e3 * res[b][0] for b in backends]
        speed = f"{ms[-1] / ms[0]:8.1f}x" if len(ms) > 1 else f"{'n/a':>8}"
        print(f"{n:5d} {iters:6d} " + " ".join(f"{m:12.3f}" for m in ms) + " " + speed)


if __name__ == "__main__":
    main()
