"""Compare the compiled selection/direction kernels against the pure-numpy
fallback: microbenchmarks of the three kernel functions, plus end-to-end
solver timings with the fallback forced via NLKACZMARZ_PURE_PYTHON=1 in a
subprocess.

Usage: python benchmarks/kernel_bench.py [--sizes 100,1000,10000] [--loops 200]
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from nlkaczmarz import _kernels_py as pyk
from nlkaczmarz import kernels

END_TO_END = [
    ("h-equation", 500, "ngabk"),
    ("h-equation", 500, "mrnabk"),
    ("broyden", 2000, "mrnabk"),
]


def bench_kernels(sizes, loops):
    try:
        from nlkaczmarz import _kernels as ck
    except ImportError:
        ck = None
    rng = np.random.default_rng(0)
    rows = []
    for m in sizes:
        fx = rng.normal(size=m)
        g = rng.normal(size=(m, max(m // 4, 1)))
        cases = [
            ("ngabk_select", lambda k: k.ngabk_select(fx)),
            ("mrnabk_select", lambda k: k.mrnabk_select(fx, 0.1)),
            ("block_direction", lambda k: k.block_direction(fx, g)),
        ]
        for name, call in cases:
            row = {"kernel": name, "m": m,
                   "numpy_us": timeit.timeit(lambda: call(pyk),
                                             number=loops) / loops * 1e6}
            if ck is not None:
                row["compiled_us"] = timeit.timeit(lambda: call(ck),
                                                   number=loops) / loops * 1e6
                row["speedup"] = row["numpy_us"] / row["compiled_us"]
            rows.append(row)
    return rows


def bench_end_to_end():
    rows = []
    for problem, n, method in END_TO_END:
        for pure in (False, True):
            env = dict(os.environ)
            env.pop("NLKACZMARZ_PURE_PYTHON", None)
            if pure:
                env["NLKACZMARZ_PURE_PYTHON"] = "1"
            out = subprocess.run(
                [sys.executable, "-m", "nlkaczmarz.cli", "solve",
                 "--problem", problem, "--n", str(n), "--method", method],
                env=env, capture_output=True, text=True, check=True)
            payload = json.loads(out.stdout)
            rows.append({"problem": problem, "n": n, "method": method,
                         "backend": payload["kernel_backend"],
                         "iters": payload["iters"],
                         "wall_ms": payload["wall_ms"]})
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,1000,10000")
    parser.add_argument("--loops", type=int, default=200)
    args = parser.parse_args()

    print(f"default kernel backend: {kernels.BACKEND}")
    print()
    print(f"{'kernel':<16}{'m':>7}{'compiled us':>13}{'numpy us':>10}{'speedup':>9}")
    for r in bench_kernels([int(s) for s in args.sizes.split(",")], args.loops):
        compiled = f"{r['compiled_us']:.2f}" if "compiled_us" in r else "n/a"
        speedup = f"{r['speedup']:.2f}" if "speedup" in r else "n/a"
        print(f"{r['kernel']:<16}{r['m']:>7}{compiled:>13}"
              f"{r['numpy_us']:>10.2f}{speedup:>9}")

    print()
    print(f"{'problem':<16}{'n':>6}{'method':>8}{'backend':>10}{'iters':>7}{'wall ms':>9}")
    for r in bench_end_to_end():
        print(f"{r['problem']:<16}{r['n']:>6}{r['method']:>8}{r['backend']:>10}"
              f"{r['iters']:>7}{r['wall_ms']:>9.1f}")


if __name__ == "__main__":
    main()
