"""Time the compiled Gram kernels against the numpy fallback.

    python3 benchmarks/bench_gram.py [--n 400] [--m 10] [--repeat 5]

Checks that both backends agree before timing them.
"""

import argparse
import timeit

import numpy as np

from kivband import _fallback

try:
    from kivband import _core
except ImportError:  # extension not built
    _core = None


def best_time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=400, help="points per side")
    parser.add_argument("--m", type=int, default=10, help="ranking length")
    parser.add_argument("--p", type=int, default=5, help="vector dimension")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(0)
    ranks = np.array([rng.permutation(args.m) + 1 for _ in range(args.n)], dtype=np.int64)
    pts = rng.standard_normal((args.n, args.p))
    cases = {
        f"kendall_gram n={args.n} m={args.m}": ("kendall_gram", ranks),
        f"sq_dists n={args.n} p={args.p}": ("sq_dists", pts),
    }

    if _core is None:
        print("compiled extension not available; timing the fallback only")
    print(f"{'kernel':<32}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for label, (name, data) in cases.items():
        py = getattr(_fallback, name)
        t_py = best_time(lambda: py(data, data), args.repeat)
        if _core is None:
            print(f"{label:<32}{t_py:>12.4f}{'-':>12}{'-':>10}")
            continue
        cy = getattr(_core, name)
        np.testing.assert_allclose(cy(data, data), py(data, data), rtol=1e-12, atol=1e-12)
        t_cy = best_time(lambda: cy(data, data), args.repeat)
        print(f"{label:<32}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
