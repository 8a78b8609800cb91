"""Time the compiled and pure-numpy kernels on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, backend) with the best wall time and the
speedup of the compiled extension over the fallback.
"""

import argparse
import math
import timeit

import numpy as np

from ere4 import kernels
from ere4.centralconfig import family_seed, solve_cc
from ere4.floquet import gauss_legendre_tableau
from ere4.linsys import OrbitParams, essential_system, full_system
from ere4.symbasis import build_basis, compute_betas


def _cases():
    masses = [1.0, 1.0, 1.0, 0.3]
    cc = solve_cc(masses, family_seed("triangle_plus_center", masses))
    betas = compute_betas(cc, build_basis(cc))
    tab = gauss_legendre_tableau(4)
    for label, system, steps in (
        ("gauss_propagate essential8 e=0.5", essential_system(OrbitParams(0.5), betas), 512),
        ("gauss_propagate full12 e=0.5", full_system(OrbitParams(0.5), betas), 512),
    ):
        A0, A1 = system.generator_pair()
        args = (A0, A1, 0.5, 0.0, 2 * math.pi, steps, *tab)
        yield label, "gauss_propagate", args, 1
    q = np.array([[z.real, z.imag] for z in cc.positions])
    yield "nbody_accel x10000", "nbody_accel", (q, np.asarray(masses)), 10000


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {"pure": kernels.pure}
    if kernels.compiled is not None:
        backends["compiled"] = kernels.compiled
    else:
        print("compiled extension not available; timing the fallback only")

    for label, name, call_args, number in _cases():
        times = {}
        for bname, mod in backends.items():
            fn = getattr(mod, name)
            times[bname] = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat))
        line = "  ".join(f"{b}={t * 1e3:9.2f} ms" for b, t in times.items())
        if len(times) == 2:
            line += f"  speedup={times['pure'] / times['compiled']:6.1f}x"
        print(f"{label:36s} {line}")


if __name__ == "__main__":
    main()
