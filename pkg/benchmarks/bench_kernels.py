"""Compare the compiled and pure-Python block kernels.

    python3 benchmarks/bench_kernels.py [--sizes 256 512 1024] [--repeat 5]

Each backend fits every 2x2 block of a normalised random image; the best of
``--repeat`` runs is reported together with the speed-up and a bit-exactness
check between the two backends.
"""

import argparse
import timeit

import numpy as np

from stemnoise.ar_core import EXCLUDED_R1, FULL_R1, PIPELINE_EPSILON, compute_energy_map
from stemnoise._backend import available_backends
from stemnoise.normalization import normalize


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[256, 512, 1024])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = available_backends()
    if backends.get("cython") is None:
        print("compiled backend not built; only the Python fallback is available")
    rng = np.random.default_rng(args.seed)

    print(f"{'size':>6} {'mode':>12} {'python ms':>10} {'cython ms':>10} {'speed-up':>9} {'identical':>9}")
    for side in args.sizes:
        xhat = normalize(rng.uniform(0, 255, size=(side, side)))
        for mode in (EXCLUDED_R1, FULL_R1):
            times, maps = {}, {}
            for name, impl in backends.items():
                if impl is None:
                    continue
                run = lambda impl=impl: compute_energy_map(xhat, mode, PIPELINE_EPSILON, backend=impl)
                times[name] = best_time(run, args.repeat)
                maps[name] = run().energy
            py = times["python"] * 1e3
            if "cython" in times:
                cy = times["cython"] * 1e3
                same = np.array_equal(maps["python"], maps["cython"])
                print(f"{side:>6} {mode:>12} {py:>10.2f} {cy:>10.2f} {py / cy:>8.1f}x {str(same):>9}")
            else:
                print(f"{side:>6} {mode:>12} {py:>10.2f} {'-':>10} {'-':>9} {'-':>9}")


if __name__ == "__main__":
    main()
