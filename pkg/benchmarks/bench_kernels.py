"""Compare the compiled kernels with their pure-Python fallbacks.

Run from the repository root after an editable install::

    python3 benchmarks/bench_kernels.py --repeat 5
"""
import argparse
import timeit

import numpy as np

from holomimo import _kernels_py

try:
    from holomimo import _kernels
except ImportError:  # extension not built
    _kernels = None


def _inputs(n_counters, n_dirs, n_clusters, seed=0):
    rng = np.random.default_rng(seed)
    counters = np.arange(n_counters, dtype=np.uint64)
    dirs = rng.standard_normal((n_dirs, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    means = rng.standard_normal((n_clusters, 3))
    means /= np.linalg.norm(means, axis=1, keepdims=True)
    kappas = rng.uniform(0, 200, n_clusters)
    coefs = rng.uniform(0, 1, n_clusters)
    return counters, (dirs, means, kappas, coefs)


def bench(module, counters, vmf_args, repeat):
    """Best-of-``repeat`` seconds per call for each kernel in ``module``."""
    return {
        "splitmix_uniforms": min(timeit.repeat(lambda: module.splitmix_uniforms(12345, counters), number=1, repeat=repeat)),
        "vmf_mixture": min(timeit.repeat(lambda: module.vmf_mixture(*vmf_args), number=1, repeat=repeat)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--counters", type=int, default=1_000_000)
    parser.add_argument("--dirs", type=int, default=200_000)
    parser.add_argument("--clusters", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    counters, vmf_args = _inputs(args.counters, args.dirs, args.clusters)
    python = bench(_kernels_py, counters, vmf_args, args.repeat)
    compiled = bench(_kernels, counters, vmf_args, args.repeat) if _kernels is not None else {}

    print(f"{'kernel':<20}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for name, t_py in python.items():
        t_c = compiled.get(name)
        if t_c is None:
            print(f"{name:<20}{1e3 * t_py:>14.2f}{'n/a':>16}{'n/a':>10}")
        else:
            print(f"{name:<20}{1e3 * t_py:>14.2f}{1e3 * t_c:>16.2f}{t_py / t_c:>9.1f}x")


if __name__ == "__main__":
    main()
