"""
Derivative estimates at tiny steps
==================================

Forward and central differences subtract two nearly equal function values,
so their error grows once the step is small. The complex step reads the
derivative off an imaginary part and keeps full precision down to steps of
1e-100 and beyond.
"""

import numpy as np

from imzero import cubic, deriv_estimate

##############################################################################
# f(x) = x**3 at x = 10, exact derivative 300.

f = cubic()
steps = np.logspace(-1, -100, 12)

print(f"{'delta':>8}  {'fd':>9}  {'cd':>9}  {'cs':>9}")
for d in steps:
    errs = [abs(deriv_estimate(m, f, 10.0, d) - 300.0) / 300.0 for m in ("fd", "cd", "cs")]
    print(f"{d:8.0e}  " + "  ".join(f"{e:9.1e}" for e in errs))

##############################################################################
# Below about 1e-15 the perturbed argument rounds back to 10 and both
# difference quotients return 0, a relative error of 1. The complex step
# stays at the rounding level of the cube itself.
#
# The full 100-point sweep at x in {-1, 0, 10} is available from the CLI:
#
#     imzero suite deriv-sweep --out figs/
