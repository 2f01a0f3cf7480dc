"""Wall-clock comparison of the compiled and numpy kernels on the transformed Euler loop.

    python3 benchmarks/bench_kernels.py [--paths 10000] [--dt-exp 10] [--repeat 3]
"""
import argparse
import time

import numpy as np

from holderdini import kernels
from holderdini.grid import GridSpec
from holderdini.kolmogorov import DriftSpec, select_lambda
from holderdini.modulus import ModulusSpec, holder_seminorm
from holderdini.sde_sim import BrownianTape, SimConfig, euler_transformed
from holderdini.zvonkin import build_transform


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - start)
    return min(times), result


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--paths", type=int, default=10_000)
    parser.add_argument("--dt-exp", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    try:
        kernels.get_backend("cython")
        backends = ["cython", "python"]
    except ImportError:
        print("compiled extension not built; timing the numpy kernels only")
        backends = ["python"]

    zmap = build_transform(select_lambda(DriftSpec.sine(), GridSpec(N=512, M=64)))
    cfg = SimConfig(dt=2.0 ** -args.dt_exp, n_paths=args.paths, seed=1, x0=(0.3,))
    tape = BrownianTape.for_config(cfg)
    print(f"transformed Euler: {args.paths} paths, {cfg.n_steps} steps")
    results = {}
    for name in backends:
        elapsed, ens = _best(lambda: euler_transformed(zmap, cfg, tape=tape, backend=name), args.repeat)
        results[name] = (elapsed, ens.X)
        print(f"  {name:7s} {elapsed:8.3f} s")
    if len(results) == 2:
        gap = float(np.max(np.abs(results["cython"][1] - results["python"][1])))
        print(f"  speedup {results['python'][0] / results['cython'][0]:.1f}x, max path difference {gap:.1e}")

    rng = np.random.default_rng(0)
    field = np.cumsum(rng.standard_normal(4096)) / 64.0
    rho = ModulusSpec.log_power(-2.0)
    print("shift seminorm scan: 4096 points")
    for name in backends:
        impl = kernels.get_backend(name)
        saved = kernels._impl
        kernels._impl = impl
        try:
            elapsed, value = _best(lambda: holder_seminorm(field, 0.5, rho, 1.0 / 256), args.repeat)
        finally:
            kernels._impl = saved
        print(f"  {name:7s} {elapsed:8.3f} s  value {value}")


if __name__ == "__main__":
    main()
