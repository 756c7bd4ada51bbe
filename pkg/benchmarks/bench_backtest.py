"""Time the backtest walk with and without numba.

    python benchmarks/bench_backtest.py [--steps 200000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from talmudic import TriggerPolicy, Weights, gen_gbm, run_backtest
from talmudic import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threshold", type=float, default=0.005)
    args = ap.parse_args()

    path = gen_gbm(100.0, 0.0, 0.01, args.steps, 1)
    w, policy = Weights(0.5), TriggerPolicy(args.threshold)

    py = best_of(lambda: run_backtest(path, w, policy, 0.001, compiled=False), max(1, args.repeat // 2))
    print(f"steps={args.steps} threshold={args.threshold}")
    print(f"python  {py * 1e3:10.2f} ms")
    if not _kernels.HAVE_NUMBA:
        print("numba   unavailable (or TALMUDIC_DISABLE_NUMBA set)")
        return
    run_backtest(path, w, policy, 0.001, compiled=True)  # compile
    nb = best_of(lambda: run_backtest(path, w, policy, 0.001, compiled=True), args.repeat)
    a = run_backtest(path, w, policy, 0.001, compiled=True)
    b = run_backtest(path, w, policy, 0.001, compiled=False)
    same = a.trade_indices == b.trade_indices and np.array_equal(a.utility_series, b.utility_series)
    print(f"numba   {nb * 1e3:10.2f} ms   speedup x{py / nb:.1f}")
    print(f"trades={a.trade_count} identical={same}")


if __name__ == "__main__":
    main()
