"""Compare the compiled and numpy stepping kernels.

    python benchmarks/bench_kernels.py --M 32 64 256 --steps 2000
"""
import argparse
import time

import numpy as np

from erknwave import _backend
from erknwave.harness import ExperimentConfig
from erknwave.integrators import make_context
from erknwave.methods import get_method


def time_backend(name, cfg, method, steps, repeat, stepper):
    pb = cfg.problem()
    x0 = cfg.initial_state(pb)
    ctx = make_context(pb, get_method(method), cfg.h)
    kern = _backend.get_kernels(name)
    poly = np.asarray(pb.g_poly, dtype=float)
    best, final = np.inf, None
    for _ in range(repeat):
        q, p = x0.q.copy(), x0.p.copy()
        t0 = time.perf_counter()
        if stepper == "erkn":
            kern.erkn_advance(q, p, steps, *ctx.erkn_arrays(), poly)
        else:
            from erknwave.spectral import nonlinearity_unchecked

            gq = nonlinearity_unchecked(q, pb)
            kern.trig_advance(q, p, steps, *ctx.trig_arrays(), gq, poly)
        best = min(best, time.perf_counter() - t0)
        final = (q, p)
    return best / steps, final


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--M", type=int, nargs="+", default=[16, 64, 256, 1024])
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--method", default="ERKN4")
    ap.add_argument("--stepper", choices=("erkn", "trig"), default="erkn")
    args = ap.parse_args(argv)

    names = sorted(_backend.BACKENDS)
    print(f"backends: {', '.join(names)} (default {_backend.DEFAULT}); method {args.method}, {args.stepper} steps")
    print(f"{'M':>6} " + " ".join(f"{n + ' us/step':>16}" for n in names) + f" {'speedup':>8} {'max diff':>10}")
    for M in args.M:
        cfg = ExperimentConfig(M=M)
        per, states = {}, {}
        for n in names:
            per[n], states[n] = time_backend(n, cfg, args.method, args.steps, args.repeat, args.stepper)
        cols = " ".join(f"{per[n] * 1e6:16.2f}" for n in names)
        if len(names) == 2:
            speed = per["python"] / per["cython"]
            diff = max(float(np.max(np.abs(states["python"][i] - states["cython"][i]))) for i in (0, 1))
            print(f"{M:>6} {cols} {speed:8.1f} {diff:10.1e}")
        else:
            print(f"{M:>6} {cols}")


if __name__ == "__main__":
    main()
