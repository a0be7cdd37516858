#!/usr/bin/env python3
"""Long-horizon boundedness probe for the arctan oscillator.

Integrates a batch of initial amplitudes to T_max tracking sup(|x| + |x'|);
with a Diophantine frequency and small even forcing the sup stays within a
small factor of the initial amplitude (the invariant-curve confinement
picture), while resonant frequencies escape.
"""

import argparse
import math

import numpy as np

from normkam.expressions import Expression
from normkam.ioutils import write_csv
from normkam.oscillator import OscillatorProblem, boundedness_sweep

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--omega", type=float, default=math.sqrt(2.0))
    ap.add_argument("--forcing", type=float, default=0.1)
    ap.add_argument("--amplitudes", default="10:100:10", help="lo:hi:count")
    ap.add_argument("--tmax", type=float, default=1e5)
    ap.add_argument("--bound-factor", type=float, default=2.0)
    ap.add_argument("--engine", choices=("auto", "jax", "scipy"), default="auto")
    ap.add_argument("--out", default="boundedness.csv")
    args = ap.parse_args()

    lo, hi, count = args.amplitudes.split(":")
    amps = np.linspace(float(lo), float(hi), int(count))
    problem = OscillatorProblem(
        omega=args.omega, g=Expression("arctan(x)"),
        p_cos=(0.0, args.forcing), g_limits=(-math.pi / 2, math.pi / 2),
    ).validate()
    reports = boundedness_sweep(problem, amps, args.tmax,
                                bound_factor=args.bound_factor, engine=args.engine)
    rows = [(r.initial_norm, r.sup_norm, r.sup_norm / r.initial_norm, r.escaped,
             "" if r.t_escape is None else r.t_escape, r.t_final) for r in reports]
    write_csv(args.out, ("amplitude", "sup_norm", "ratio", "escaped",
                         "t_escape", "t_final"), rows)
    for r in reports:
        print(f"A = {r.initial_norm:7.2f}  sup = {r.sup_norm:9.3f} "
              f"({r.sup_norm / r.initial_norm:.3f} x)  escaped = {r.escaped}")
