"""Time the compiled and pure-numpy paths of the hot kernels.

Run with ``python benchmarks/bench_kernels.py``. Both paths are timed in
one process by calling the kernels directly, so ``AERIS_DISABLE_NUMBA``
does not need to be toggled. Compilation time is reported separately.
"""

import argparse
import time

import numpy as np

from aeris.distributions import RngHandle
from aeris.matching import HopPairParams
from aeris.simulator import _channel_sums_numba, _channel_sums_numpy, _kernel_args
from aeris.specfun import _RGAMMA_TAYLOR, _bessel_k_kernel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_channel_sums(trials, n, repeat):
    hop = HopPairParams.symmetric(1.5, 2.55, 3.0, 1.0)
    args = _kernel_args(hop)

    def run(kernel):
        return kernel(RngHandle(1).generator, trials, n, *args)

    t0 = time.perf_counter()
    run(_channel_sums_numba)
    compile_s = time.perf_counter() - t0
    t_nb = best_of(lambda: run(_channel_sums_numba), repeat)
    t_np = best_of(lambda: run(_channel_sums_numpy), repeat)
    same = all(np.array_equal(a, b) for a, b in zip(run(_channel_sums_numba), run(_channel_sums_numpy)))
    print(f"channel_sums  trials={trials} n={n}: numba {t_nb:.4f}s  numpy {t_np:.4f}s  "
          f"speedup {t_np / t_nb:.2f}x  (first call {compile_s:.2f}s)  identical={same}")


def bench_bessel(count, repeat):
    rng = np.random.default_rng(0)
    nus = rng.uniform(0.0, 8.0, count)
    xs = rng.uniform(0.05, 40.0, count)

    def run(kernel):
        return [kernel(nu, x, _RGAMMA_TAYLOR) for nu, x in zip(nus, xs)]

    run(_bessel_k_kernel)
    t_nb = best_of(lambda: run(_bessel_k_kernel), repeat)
    t_py = best_of(lambda: run(_bessel_k_kernel.py_func), repeat)
    print(f"bessel_k      calls={count}: numba {t_nb:.4f}s  python {t_py:.4f}s  speedup {t_py / t_nb:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=50_000)
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--bessel-calls", type=int, default=5_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    bench_channel_sums(args.trials, args.n, args.repeat)
    bench_bessel(args.bessel_calls, args.repeat)


if __name__ == "__main__":
    main()
