"""Compiled vs pure-Python integration kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Times both implementations on the same inputs and reports the largest
difference between their outputs.
"""

import argparse
import math
import time

import numpy as np

from echolab import _kernels_py, fock, gaussian
from echolab.model import DeviceParams, derive

try:
    from echolab import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat):
    best = math.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def fock_case(dim):
    dev = DeviceParams(20e6, 1e6, 1.0, q_factor=100, nbar=1, mbar=1, t2_s=10e-6, alpha0=1.5)
    d = derive(dev)
    rho = fock.displaced_thermal(dev.alpha0, dev.mbar, dim, check_dim=False)
    diag, up, down = fock.generator("pp", dim, d)
    duration = 0.5 / d.omega1_rad
    h0 = 0.1 / (d.omega_rad * dim)

    def run(mod):
        return lambda: mod.lindblad_integrate(rho, diag, up, down, duration, 1e-9, h0, 10**7, True)

    return f"lindblad dim={dim}", run, lambda r: r[0]


def gaussian_case():
    dev = DeviceParams(5e9, 50e6, 0.2, q_factor=3000, nbar=10, mbar=10, t2_s=0.5e-6, alpha0=25)
    d = derive(dev)
    y0 = gaussian.GaussianParams.initial(dev.alpha0, dev.mbar).as_array()
    params = (d.omega_rad, d.omega1_rad, d.gamma_rad, d.big_n)

    def run(mod):
        return lambda: mod.gaussian_integrate(y0, params, 0.4e-6, 1e-10, 1e-11, 10**8)

    return "gaussian 0.4 us, paper scale", run, lambda r: r[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    cases = [fock_case(50), fock_case(100), gaussian_case()]
    print(f"{'case':32s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s} {'max diff':>10s}")
    for name, run, pick in cases:
        t_py, r_py = _time(run(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{name:32s} {t_py:10.4f}")
            continue
        t_c, r_c = _time(run(_kernels), args.repeat)
        diff = float(np.max(np.abs(np.asarray(pick(r_py)) - np.asarray(pick(r_c)))))
        print(f"{name:32s} {t_py:10.4f} {t_c:11.4f} {t_py / t_c:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
