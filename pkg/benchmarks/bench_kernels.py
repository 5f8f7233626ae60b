"""Time the compiled kernels against their uncompiled or vectorised twins.

    python benchmarks/bench_kernels.py [--shots N] [--repeat R]

Each pair is also checked for identical output before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ptrdual import _accel, _kernels
from ptrdual.experiment import ExperimentConfig, _block_uniforms, build_tables
from ptrdual.gaussian import PDC


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (and JIT compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=30)
    args = ap.parse_args(argv)
    if not _accel.USE_NUMBA:
        print("numba is disabled or missing; both columns time the numpy path")

    pdc = PDC(2.0)
    rng = np.random.default_rng(0)
    d = args.n_max + 1
    grid = np.zeros((d, d), dtype=np.complex128)
    grid[: d // 3, : d // 3] = rng.normal(size=(d // 3, d // 3))

    def elements(fn):
        return lambda: [fn(n, m, 3, 4, pdc.tanh, pdc.sech) for n in range(20) for m in range(20)]

    cases = [
        ("pdc_amp x400", elements(_kernels.pdc_amp), elements(_accel.python_impl(_kernels.pdc_amp))),
        ("apply_pdc", lambda: _kernels.apply_pdc(grid, pdc.tanh, pdc.sech),
         lambda: _accel.python_impl(_kernels.apply_pdc)(grid, pdc.tanh, pdc.sech)),
    ]
    config = ExperimentConfig(gain=2.0, shots=args.shots, seed=1)
    tables = build_tables(config)
    u = _block_uniforms(config.seed, 0, args.shots)
    targs = (u, tables.herald_cdf, tables.thin_cdf, tables.pdc_cdf, config.pnr_max)
    cases.append((f"sample_shots x{args.shots}", lambda: _kernels.sample_shots(*targs),
                  lambda: _kernels.sample_shots_numpy(*targs)))

    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speed-up':>10}  same")
    for name, fast, slow in cases:
        same = all(np.array_equal(np.asarray(a), np.asarray(b))
                   or np.allclose(np.asarray(a), np.asarray(b), rtol=1e-13, atol=1e-15)
                   for a, b in [(fast(), slow())])
        t_fast = best_of(fast, args.repeat)
        t_slow = best_of(slow, args.repeat)
        print(f"{name:<24}{t_fast:>12.4g}{t_slow:>12.4g}{t_slow / t_fast:>10.1f}  {same}")


if __name__ == "__main__":
    main()
