"""
Contraction rate against dimension
==================================

On 0.5 * |x|**2 with the step 1 / (2 n L1) the expected squared distance
contracts by exactly 1 - 3 / (4 n) per iteration, comfortably faster than the
guaranteed 1 - 1 / (4 n).
"""

import numpy as np

from imzero import Quadratic, SolverConfig, Stepsize
from imzero.bench import run_trials

for n in (1, 10, 100):
    K = 40 * n
    obj = Quadratic(n)
    cfg = SolverConfig(iters=K, stepsize=Stepsize.CS_CONVEX, record_stride=K, seed=3)
    traces = run_trials(obj, obj.default_x0(), cfg, 20)
    rates = [(t["f_xk"][-1] / t["f_xk"][0]) ** (1 / K) for t in traces]
    print(f"n={n:>3}: median contraction {np.median(rates):.5f}, "
          f"expected {1 - 3 / (4 * n):.5f}, guaranteed {1 - 1 / (4 * n):.5f}")

##############################################################################
# For n = 1 the sphere is {-1, +1} and every step halves the iterate, so the
# contraction of 1/4 is exact rather than an average.
