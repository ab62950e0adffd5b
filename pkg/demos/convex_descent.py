"""
Descent on an ill-conditioned quadratic
=======================================

The complex-step method and the Gaussian forward-difference method are
compared on Nesterov's tridiagonal test function with a very small scale
factor, for smoothing radii approaching machine precision.
"""

import numpy as np

from imzero import Constant, OracleKind, SolverConfig, WorstFunction, run
from imzero.bench import default_stepsize

f = WorstFunction(5, 1e-8)
x0 = np.zeros(5)
K = 20_000

##############################################################################
# The gap is reported relative to |f*| so the scale factor drops out.

print(f"{'oracle':>6} {'delta':>7} {'gap x_K':>10} {'gap avg':>10}")
for kind in (OracleKind.CS, OracleKind.GSFD):
    for d in (1e-6, 1e-10, 1e-14, 1e-16):
        cfg = SolverConfig(oracle=kind, iters=K, stepsize=default_stepsize(kind),
                           schedule=Constant(d), seed=1)
        tr = run(f, x0, cfg)
        rel = np.array([tr["gap_xk"][-1], tr["gap_xbar"][-1]]) / abs(f.f_star)
        print(f"{kind.value:>6} {d:7.0e} {rel[0]:10.2e} {rel[1]:10.2e}")

##############################################################################
# The complex-step rows do not depend on delta: on a quadratic the oracle is
# exact for every positive radius. The forward-difference rows degrade once
# delta * |grad f| approaches the rounding level of f.
