"""
Monte-Carlo checks of the smoothed function
===========================================

The complex-step oracle is an unbiased estimate of the gradient of a
smoothed function. Its bias against the true gradient shrinks like the
square of the smoothing radius and its second moment is ``n * |grad f|**2``
plus higher-order terms.
"""

import math

import numpy as np

from imzero import (
    Quadratic,
    RngState,
    mc_f_delta,
    mc_grad_delta,
    mc_remainder_moment,
    mc_second_moment,
    moment_matrix,
    quartic,
    slope_fit,
)

M = 200_000

##############################################################################
# Sphere moment: n * E[u u^T] is the identity.

est = moment_matrix(5, M, RngState(0, 1))
print("sphere moment error:", np.linalg.norm(est.value - np.eye(5)))

##############################################################################
# On 0.5 * |x|**2 the smoothed value at the origin is -delta**2 n / (2 (n + 2)).

d, n = 0.1, 2
est = mc_f_delta(Quadratic(n), np.zeros(n), d, M, RngState(0, 2))
print(f"f_delta(0) = {est.value:.6e} +- {est.std_error:.1e}, closed form {-d * d * n / (2 * (n + 2)):.6e}")

##############################################################################
# Bias orders on x**4 at x = 1: value bias and gradient bias both scale as
# delta**2; the oracle's deviation from its limit scales as delta**4.

f = quartic(L2=24.0)
deltas = np.logspace(-2, -1, 6)
value_bias = [(d, abs(mc_f_delta(f, [1.0], d, M, RngState(0, 3)).value - 1.0)) for d in deltas]
grad_bias = [(d, abs(mc_grad_delta(f, [1.0], d, 1000, RngState(0, 4)).value[0] - 4.0)) for d in deltas]
remainder = [(d, mc_remainder_moment(f, [1.0], d, 1000, RngState(0, 5)).value) for d in deltas]
for name, pts in (("value bias", value_bias), ("gradient bias", grad_bias), ("remainder", remainder)):
    print(f"{name:>14} slope {slope_fit(pts)[0]:.3f}")

##############################################################################
# The gradient bias sits right on the bound n delta**2 L2 / 6 = 4 delta**2.

print("bias / bound:", " ".join(f"{b / (4 * d * d):.6f}" for d, b in grad_bias))

##############################################################################
# Second moment on a quadratic equals n |grad f|**2 for any delta, even 1e-100.

x = np.full(5, 1 / math.sqrt(5))
for d in (1e-4, 1e-16, 1e-100):
    est = mc_second_moment(Quadratic(5), x, d, M, RngState(0, 6))
    print(f"delta={d:.0e}: E|g|^2 = {est.value:.4f} +- {est.std_error:.4f}")
