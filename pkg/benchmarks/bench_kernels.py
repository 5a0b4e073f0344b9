"""Time the compiled grid posterior kernel against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 50] [--n-phi 1024] [--n-v 512]

Reports the median wall time per call and the largest absolute density
difference between the two backends for a few count regimes.
"""

import argparse
import statistics
import time

import numpy as np

from chiraltrack import _core_py
from chiraltrack.estimator import _log_prob_table
from chiraltrack.model import CANONICAL_SETTINGS, probability_vector

try:
    from chiraltrack import _core
except ImportError:
    _core = None

CASES = {
    "one cycle (N=1e3)": 1_000,
    "pooled (N=1e4)": 10_000,
    "water run (N=1e5)": 100_000,
}


def time_kernel(kernel, logp, counts, repeat):
    P, V = logp.shape[1:]
    out = np.empty((P, V)), np.empty(P), np.empty(V)
    kernel(logp, counts, None, *out)  # warm up
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        kernel(logp, counts, None, *out)
        samples.append(time.perf_counter() - start)
    return statistics.median(samples), out[0].copy()


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=50)
    parser.add_argument("--n-phi", type=int, default=1024)
    parser.add_argument("--n-v", type=int, default=512)
    args = parser.parse_args()

    logp = _log_prob_table(args.n_phi, args.n_v, CANONICAL_SETTINGS, None)[0]
    p = probability_vector(0.1, 0.85)
    cases = {name: np.round(n * p).astype(np.int64) for name, n in CASES.items()}
    cases["flat (1,1,1,1)"] = np.ones(4, dtype=np.int64)

    print(f"grid {args.n_phi} x {args.n_v}, median of {args.repeat} calls")
    print(f"{'case':<20} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, counts in cases.items():
        t_py, d_py = time_kernel(_core_py.grid_posterior, logp, counts, args.repeat)
        if _core is None:
            print(f"{name:<20} {t_py * 1e3:>10.2f} {'n/a':>10}")
            continue
        t_c, d_c = time_kernel(_core.grid_posterior, logp, counts, args.repeat)
        diff = np.max(np.abs(d_py - d_c))
        print(f"{name:<20} {t_py * 1e3:>10.2f} {t_c * 1e3:>10.2f} {t_py / t_c:>7.1f}x {diff:>11.1e}")


if __name__ == "__main__":
    main()
