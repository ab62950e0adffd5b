"""Monte-Carlo estimators for the complex-step smoothed function and its oracle.

All estimators draw their samples in blocks whose rows coincide with
successive single draws from the same stream, accumulate the sum in sample
order, and merge block variances with the pairwise update of Chan et al. so
that ``M`` in the tens of millions needs one pass and bounded memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .objective import Objective, _cplx
from .sampling import RngState, ball_sample, sphere_sample

_BLOCK_FLOATS = 1 << 20


@dataclass(frozen=True)
class McEstimate:
    value: float | np.ndarray
    std_error: float | np.ndarray
    samples: int


class _Accumulator:
    """Running sum and centred second moment of a stream of sample blocks."""

    def __init__(self):
        self.count = 0
        self.total = None
        self.mean = None
        self.m2 = None

    def add(self, block: np.ndarray):
        k = block.shape[0]
        # cumulative sum is strictly sequential, so folding the running total
        # into the first row continues the sum in sample order
        folded = block.copy()
        if self.total is not None:
            folded[0] = self.total + block[0]
        running = np.cumsum(folded, axis=0)[-1]
        b_mean = block.mean(axis=0)
        b_m2 = ((block - b_mean) ** 2).sum(axis=0)
        if self.count == 0:
            self.mean, self.m2 = b_mean, b_m2
        else:
            n_tot = self.count + k
            d = b_mean - self.mean
            self.mean = self.mean + d * (k / n_tot)
            self.m2 = self.m2 + b_m2 + d * d * (self.count * k / n_tot)
        self.total = running
        self.count += k

    def result(self) -> McEstimate:
        m = self.count
        value = self.total / m
        var = self.m2 / (m - 1)
        se = np.sqrt(np.maximum(var, 0.0) / m)
        if np.ndim(value) == 0:
            return McEstimate(float(value), float(se), m)
        return McEstimate(value, se, m)


def _check_m(M):
    M = int(M)
    if M < 2:
        raise ValueError(f"need at least 2 samples, got {M}")
    return M


def _check_delta(obj, delta):
    delta = float(delta)
    if not 0 < delta < obj.delta_bar:
        raise ValueError(f"delta must lie in (0, {obj.delta_bar}), got {delta}")
    return delta


def _run(M: int, width: int, draw: Callable[[int], np.ndarray]) -> McEstimate:
    rows = max(1, _BLOCK_FLOATS // max(width, 1))
    acc = _Accumulator()
    left = M
    while left > 0:
        k = min(rows, left)
        acc.add(draw(k))
        left -= k
    return acc.result()


def _shift(x, offsets):
    """Complex points x + i*offsets, row-wise."""
    return _cplx(np.broadcast_to(x, offsets.shape), offsets)


def _cs_block(obj, x, delta, U):
    im = np.imag(obj.value(_shift(x, delta * U)))
    return (obj.n * im / delta)[:, None] * U


def mc_f_delta(obj: Objective, x, delta: float, M: int, rng: RngState) -> McEstimate:
    """Mean of Re f(x + i*delta*v) over ``M`` uniform ball points v."""
    x = obj._check(x)
    delta = _check_delta(obj, delta)

    def draw(k):
        V = ball_sample(rng, obj.n, k)
        return np.real(obj.value(_shift(x, delta * V)))

    return _run(_check_m(M), obj.n, draw)


def mc_grad_delta(obj: Objective, x, delta: float, M: int, rng: RngState) -> McEstimate:
    """Mean of the complex-step oracle over ``M`` sphere directions.

    The value equals the running sum of ``M`` successive oracle calls on the
    same stream divided by ``M``, bit for bit.
    """
    x = obj._check(x)
    delta = _check_delta(obj, delta)
    return _run(_check_m(M), obj.n,
                lambda k: _cs_block(obj, x, delta, sphere_sample(rng, obj.n, k)))


def mc_second_moment(obj: Objective, x, delta: float, M: int, rng: RngState) -> McEstimate:
    """Mean of the squared norm of the complex-step oracle."""
    x = obj._check(x)
    delta = _check_delta(obj, delta)

    def draw(k):
        G = _cs_block(obj, x, delta, sphere_sample(rng, obj.n, k))
        return (G * G).sum(axis=1)

    return _run(_check_m(M), obj.n, draw)


def mc_remainder_moment(obj: Objective, x, delta: float, M: int, rng: RngState) -> McEstimate:
    """Mean of ‖g - n<grad f(x), u> u‖², the oracle's deviation from its δ → 0 limit.

    Isolates the fourth-order term of the second moment, which the plain
    second moment mixes with a cross term of order δ².
    """
    x = obj._check(x)
    delta = _check_delta(obj, delta)
    grad = obj.grad_ref(x)

    def draw(k):
        U = sphere_sample(rng, obj.n, k)
        R = _cs_block(obj, x, delta, U) - (obj.n * (U @ grad))[:, None] * U
        return (R * R).sum(axis=1)

    return _run(_check_m(M), obj.n, draw)


def moment_matrix(n: int, M: int, rng: RngState) -> McEstimate:
    """Monte-Carlo estimate of n * E[u uᵀ] for u uniform on the sphere."""
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")

    def draw(k):
        U = sphere_sample(rng, n, k)
        return n * (U[:, :, None] * U[:, None, :])

    return _run(_check_m(M), n * n, draw)


def slope_fit(points, floor: float = 1e-15) -> tuple[float, float]:
    """Least-squares line through (log delta, log error).

    Points whose error sits below ``floor`` times the largest error are at the
    floating-point floor and are dropped before fitting.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise ValueError("need at least 3 (delta, error) pairs")
    d, e = pts[:, 0], np.abs(pts[:, 1])
    if np.any(d <= 0):
        raise ValueError("deltas must be positive")
    keep = e > floor * e.max()
    if keep.sum() < 2:
        raise ValueError("fewer than 2 points above the floating-point floor")
    slope, intercept = np.polyfit(np.log(d[keep]), np.log(e[keep]), 1)
    return float(slope), float(intercept)
