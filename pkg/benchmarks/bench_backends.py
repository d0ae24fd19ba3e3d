"""Time the compiled kernels against the pure-NumPy fallback.

The compiled extension exists for the Metropolis-Hastings hot path: one
log-likelihood evaluation per proposal, tens of thousands of sequential
calls with a single parameter row each. At that shape the NumPy fallback
pays ~50us of Python and allocation overhead per call. On wide parameter
batches NumPy's SIMD exp/log catches up and can win, which this script
reports honestly rather than hiding behind a single flattering shape.

Each case checks backend agreement to near machine precision before
timing. Usage:

    python3 benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import sys
import time

import numpy as np

try:
    from warranty2d import _kernels
except ImportError:
    _kernels = None
from warranty2d import _kernels_py


def _params(k, rng):
    return np.column_stack([
        rng.uniform(1.0, 3.0, k),      # eta_t
        rng.uniform(0.8, 2.5, k),      # lambda_t
        rng.uniform(0.5, 2.0, k),      # eta_u
        rng.uniform(0.8, 2.5, k),      # lambda_u
        rng.uniform(0.05, 0.95, k),    # theta
    ])


def _time(fn, repeats, min_reps):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for _ in range(min_reps):
            fn()
        best = min(best, (time.perf_counter() - start) / min_reps)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(42)
    tf = rng.uniform(0.05, 4.0, 34)
    uf = rng.uniform(0.05, 3.0, 34)
    tg, ug = np.meshgrid(np.linspace(0.05, 4.0, 32),
                         np.linspace(0.05, 3.0, 32))
    tg, ug = tg.ravel(), ug.ravel()
    rects = np.column_stack([
        rng.uniform(0.0, 1.0, 9), rng.uniform(1.2, 3.0, 9),
        rng.uniform(0.0, 0.8, 9), rng.uniform(1.0, 2.5, 9),
    ])
    xi, w = np.polynomial.legendre.leggauss(32)
    xi, w = 0.5 * (xi + 1.0), 0.5 * w

    # (label, batch size, inner reps, call)
    cases = [
        ("loglik, 1 draw (MH step)", 1, 200,
         lambda m, p: m.loglik(p, tf, uf, 2, 4.0, 3.0, False)),
        ("loglik, 256 draws", 256, 20,
         lambda m, p: m.loglik(p, tf, uf, 2, 4.0, 3.0, False)),
        ("loglik, 2000 draws", 2000, 3,
         lambda m, p: m.loglik(p, tf, uf, 2, 4.0, 3.0, False)),
        ("log_reliability, 256 x 1024", 256, 3,
         lambda m, p: m.log_reliability(p, tg, ug)),
        ("log_pdf, 256 x 34", 256, 20,
         lambda m, p: m.log_pdf(p, tf, uf)),
        ("rect_moments, 64 x 9 rects", 64, 3,
         lambda m, p: m.rect_moments(p, rects, xi, w)),
    ]

    print(f"best of {args.repeats} runs, backend parity checked per case")
    print(f"{'case':<30} {'numpy':>11} {'compiled':>11} {'speedup':>8}")
    for name, k, reps, call in cases:
        p = _params(k, rng)
        ref = np.asarray(call(_kernels_py, p))
        got = np.asarray(call(_kernels, p))
        err = np.max(np.abs(got - ref))
        if err > 1e-9 * max(1.0, np.max(np.abs(ref))):
            print(f"{name}: backend mismatch, max abs err {err:g}",
                  file=sys.stderr)
            return 1
        t_py = _time(lambda: call(_kernels_py, p), args.repeats, reps)
        t_c = _time(lambda: call(_kernels, p), args.repeats, reps)
        print(f"{name:<30} {t_py * 1e6:>9.1f}us {t_c * 1e6:>9.1f}us "
              f"{t_py / t_c:>7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
