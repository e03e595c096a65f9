"""Wall-time comparison of the compiled and pure-numpy kernel backends.

The backend is fixed at import time by OECHAIN_BACKEND, so each timing
runs in a child interpreter. Compilation happens during the warmup call
and is excluded from the timed loop.

Usage: python benchmarks/bench_integrator.py [--steps N] [--repeat R]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from oechain import backend, kernels
from oechain.model import chain
from oechain.ml import oeeo_network

steps = int(sys.argv[1])
repeat = int(sys.argv[2])

spec = chain(10, 0.7, 0.4, 0.5, b=1.1)
wx, wz = spec.end_frequencies
chain_args = (wx, wz, spec.b, spec.c_oe, spec.c_eo, spec.c_ee, spec.has_z)
net_args = oeeo_network(0.4, 0.05, 0.1).coupling_arrays()

def time_kernel(advance, state, args):
    advance(state.copy(), 0.005, 64, *args)  # warmup/compile
    best = float("inf")
    for _ in range(repeat):
        s = state.copy()
        t0 = time.perf_counter()
        advance(s, 0.005, steps, *args)
        best = min(best, time.perf_counter() - t0)
    return best

rng = np.random.default_rng(0)
chain_state = rng.uniform(0.0, 6.28, spec.dim)
ml_state = np.empty(8)
ml_state[0::2] = rng.uniform(-60.0, 20.0, 4)
ml_state[1::2] = rng.uniform(0.0, 0.4, 4)

print(json.dumps({
    "backend": backend.ACTIVE,
    "chain_s": time_kernel(kernels.chain_rk4, chain_state, chain_args),
    "ml_s": time_kernel(kernels.ml_rk4, ml_state, net_args),
}))
"""


def run_backend(name, steps, repeat):
    env = dict(os.environ, OECHAIN_BACKEND=name)
    res = subprocess.run([sys.executable, "-c", WORKER,
                          str(steps), str(repeat)],
                         capture_output=True, text=True, env=env)
    if res.returncode != 0:
        print("backend %s failed:\n%s" % (name, res.stderr), file=sys.stderr)
        return None
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=500_000,
                        help="integration steps per timing (default 5e5)")
    parser.add_argument("--repeat", type=int, default=3,
                        help="timing repetitions, best is kept (default 3)")
    args = parser.parse_args()

    results = {}
    for name in ("numpy", "numba"):
        out = run_backend(name, args.steps, args.repeat)
        if out is not None:
            results[name] = out

    print("%-8s %15s %15s" % ("backend", "chain 12-cell", "ml 4-cell"))
    for name, out in results.items():
        print("%-8s %12.3f s %12.3f s"
              % (name, out["chain_s"], out["ml_s"]))
    if len(results) == 2:
        for key, label in (("chain_s", "chain"), ("ml_s", "ml")):
            ratio = results["numpy"][key] / results["numba"][key]
            print("%s speedup: %.1fx" % (label, ratio))


if __name__ == "__main__":
    main()
