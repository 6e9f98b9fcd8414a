"""Compare the compiled and pure-Python simulation loops.

Runs the same real-fault tracking scenario on each available backend,
reports steps per second and checks that the traces agree.

    python3 benchmarks/bench_kernel.py --steps 20000
"""

import argparse
import time

import numpy as np

from quakectl.controllers import preset_spec
from quakectl.model import REAL_FAULT
from quakectl.sim import available_backends, run_scenario, tracking_scenario


def time_backend(scenario, backend, repeat):
    best = float("inf")
    trace = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = run_scenario(scenario, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--controller", default="sim-2cta",
                        choices=("sim-2cta", "sim-2dia", "sim-elqr"))
    parser.add_argument("--loop", default="continuous", choices=("continuous", "zoh"))
    args = parser.parse_args(argv)

    scenario = tracking_scenario(REAL_FAULT, preset_spec(args.controller), loop=args.loop,
                                 horizon=args.steps * REAL_FAULT.T_s)
    results = {}
    for backend in available_backends():
        elapsed, trace = time_backend(scenario, backend, args.repeat)
        results[backend] = (elapsed, trace)
        print(f"{backend:>8}: {elapsed:8.3f} s  {args.steps / elapsed:12.0f} steps/s")

    if len(results) == 2:
        (t_py, tr_py), (t_c, tr_c) = results["python"], results["cython"]
        diff = np.max(np.abs(tr_py.data - tr_c.data))
        print(f"speed-up: {t_py / t_c:.1f}x, max |difference| = {diff:.3g}")
        full = int(REAL_FAULT.t_op / REAL_FAULT.T_s)
        print(f"projected full real-fault run ({full} steps): "
              f"cython {full * t_c / args.steps:.1f} s, python {full * t_py / args.steps:.0f} s")
    else:
        print("compiled kernel not built; only the Python loop was timed")


if __name__ == "__main__":
    main()
