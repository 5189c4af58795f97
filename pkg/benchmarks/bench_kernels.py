"""Time the compiled kernels against the numpy fallback.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Both implementations get identical inputs; outputs are compared before
timing so a speedup is never reported for a kernel that disagrees.
"""
import argparse
import json
import sys
import timeit

import numpy as np

from rmt_lab import _kernels_py

try:
    from rmt_lab import _kernels as _compiled
except ImportError:
    _compiled = None


def _cases(rng):
    eigs = np.sort(rng.standard_normal((2000, 128)), axis=1)
    weights = rng.random((2000, 128))
    weights /= weights.sum(axis=1, keepdims=True)
    edges = np.linspace(-3, 3, 61)
    values = np.abs(1 / rng.standard_normal(1_000_000))
    t = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    e = rng.standard_normal(8)
    b = rng.standard_normal(8)
    g = rng.standard_normal((200_000, 8))
    x, y = rng.random(1_000_000), rng.standard_normal(1_000_000)
    return {
        "interval_counts": (lambda m: m.interval_counts(eigs, edges)),
        "resolvent_stats": (lambda m: m.resolvent_stats(eigs, weights, 1e-13)),
        "tail_counts": (lambda m: m.tail_counts(values, t, True)),
        "quadratic_ratio": (lambda m: m.quadratic_ratio(e, b, 0.3, g)),
        "phase_mean": (lambda m: m.phase_mean(x, y, 0.4, -0.2)),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(_same(p, q) for p, q in zip(a, b))
    # summation order differs, so ratios with a near-cancelling denominator move in the last digits
    return np.allclose(a, b, rtol=1e-8, atol=0, equal_nan=True)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write the timings here")
    args = parser.parse_args(argv)
    if _compiled is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    rows = []
    for name, call in _cases(np.random.default_rng(0)).items():
        if not _same(call(_kernels_py), call(_compiled)):
            print(f"{name}: outputs differ", file=sys.stderr)
            return 1
        py = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        cy = min(timeit.repeat(lambda: call(_compiled), number=1, repeat=args.repeat))
        rows.append({"kernel": name, "python_s": py, "cython_s": cy, "speedup": py / cy})
    print(f"{'kernel':<18}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for r in rows:
        print(f"{r['kernel']:<18}{1e3 * r['python_s']:>14.2f}{1e3 * r['cython_s']:>14.2f}{r['speedup']:>9.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
