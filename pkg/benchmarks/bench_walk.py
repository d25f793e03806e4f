"""Time the compiled walk accumulation against the NumPy fallback.

    python benchmarks/bench_walk.py --group h1 --samples 4096 --steps 1024
"""

import argparse
import time

import numpy as np

from carnot_mehler import get_group
from carnot_mehler import _walk_py

try:
    from carnot_mehler import _walk
except ImportError:
    _walk = None


def best_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--group", default="h1")
    parser.add_argument("--samples", type=int, default=4096)
    parser.add_argument("--steps", type=int, default=1024)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    alg = get_group(args.group)
    first = np.asarray(alg.first_layer, dtype=np.int32)
    rng = np.random.default_rng(0)
    increments = rng.standard_normal((args.samples, args.steps, len(first))) / np.sqrt(args.steps)
    bi, bj, bm, bc = alg._bracket_float
    call = lambda mod: mod.accumulate(increments, first, bi, bj, bm, bc, alg.dim, alg.step)

    rng_time = best_time(lambda: rng.standard_normal(increments.shape), args.repeats)
    py_time = best_time(lambda: call(_walk_py), args.repeats)
    print(f"group {alg.name}: {args.samples} samples x {args.steps} steps")
    print(f"  increment generation  {rng_time:8.3f} s")
    print(f"  numpy accumulation    {py_time:8.3f} s")
    if _walk is None:
        print("  compiled extension not built")
        return
    c_time = best_time(lambda: call(_walk), args.repeats)
    same = np.array_equal(call(_walk), call(_walk_py))
    print(f"  compiled accumulation {c_time:8.3f} s  (speedup {py_time / c_time:.1f}x)")
    print(f"  outputs identical: {same}")


if __name__ == "__main__":
    main()
