"""Gradient surrogates built from function values.

The complex-step estimator evaluates ``f`` once at ``x + i*delta*u`` and reads
the directional derivative off the imaginary part; nothing is subtracted, so
``delta`` may go down to the subnormal range. The real-valued comparison
estimators difference function values and break down once ``delta`` pushes
``f(x + delta*u)`` within rounding of ``f(x)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .objective import Objective, _cplx
from .sampling import RngState, gaussian_sample, sphere_sample


class OracleKind(str, enum.Enum):
    CS = "cs"
    SP = "sp"
    TP = "tp"
    GSFD = "gs-fd"
    GSCD = "gs-cd"

    @property
    def evals(self) -> int:
        return 1 if self in (OracleKind.CS, OracleKind.SP) else 2

    @property
    def gaussian(self) -> bool:
        return self in (OracleKind.GSFD, OracleKind.GSCD)


@dataclass(frozen=True)
class GradEstimate:
    g: np.ndarray
    u: np.ndarray
    delta: float
    evals: int


def _positive(delta):
    delta = float(delta)
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return delta


def cs_gradient(obj: Objective, x, delta: float, u) -> GradEstimate:
    """(n/delta) * Im f(x + i*delta*u) * u."""
    delta = _positive(delta)
    u = np.asarray(u, dtype=float)
    _, im = obj.eval_complex(x, delta * u)
    g = (obj.n * im / delta) * u
    return GradEstimate(g, u, delta, 1)


def sp_gradient(obj: Objective, x, delta: float, u) -> GradEstimate:
    """(n/delta) * f(x + delta*u) * u; unbounded variance as delta -> 0."""
    delta = _positive(delta)
    u = np.asarray(u, dtype=float)
    fp = obj.eval_real(np.asarray(x, dtype=float) + delta * u)
    return GradEstimate((obj.n * fp / delta) * u, u, delta, 1)


def tp_gradient(obj: Objective, x, delta: float, u) -> GradEstimate:
    """(n/delta) * (f(x + delta*u) - f(x)) * u."""
    delta = _positive(delta)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    diff = obj.eval_real(x + delta * u) - obj.eval_real(x)
    return GradEstimate((obj.n * diff / delta) * u, u, delta, 2)


def gs_fd_gradient(obj: Objective, x, delta: float, u_gauss) -> GradEstimate:
    """Gaussian forward difference: (f(x + delta*u) - f(x)) / delta * u."""
    delta = _positive(delta)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u_gauss, dtype=float)
    diff = obj.eval_real(x + delta * u) - obj.eval_real(x)
    return GradEstimate((diff / delta) * u, u, delta, 2)


def gs_cd_gradient(obj: Objective, x, delta: float, u_gauss) -> GradEstimate:
    """Gaussian central difference: (f(x + delta*u) - f(x - delta*u)) / (2 delta) * u."""
    delta = _positive(delta)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u_gauss, dtype=float)
    diff = obj.eval_real(x + delta * u) - obj.eval_real(x - delta * u)
    return GradEstimate((diff / (2.0 * delta)) * u, u, delta, 2)


ESTIMATORS: dict[OracleKind, Callable[..., GradEstimate]] = {
    OracleKind.CS: cs_gradient,
    OracleKind.SP: sp_gradient,
    OracleKind.TP: tp_gradient,
    OracleKind.GSFD: gs_fd_gradient,
    OracleKind.GSCD: gs_cd_gradient,
}


def draw_direction(kind: OracleKind, rng: RngState, n: int, size: int | None = None):
    """Direction(s) for ``kind``: Gaussian for the GS pair, the sphere otherwise."""
    if OracleKind(kind).gaussian:
        return gaussian_sample(rng, n, size)
    return sphere_sample(rng, n, size)


def oracle_dispatch(kind, obj: Objective, x, delta: float, rng: RngState) -> GradEstimate:
    """Draw one direction from ``rng`` and apply the matching estimator."""
    kind = OracleKind(kind)
    u = draw_direction(kind, rng, obj.n)
    return ESTIMATORS[kind](obj, x, delta, u)


def _scalar_function(f):
    if isinstance(f, Objective):
        if f.n != 1:
            raise ValueError("derivative estimates need a one-dimensional objective")
        return lambda z: f.value(np.asarray([z]))
    return f


def deriv_estimate(method: str, f, x: float, delta: float) -> float:
    """Scalar derivative estimate by forward difference, central difference or complex step.

    ``f`` is a one-dimensional :class:`Objective` or any callable that accepts
    real and complex scalars.
    """
    delta = _positive(delta)
    fn = _scalar_function(f)
    x = float(x)
    if method == "fd":
        return float((np.real(fn(x + delta)) - np.real(fn(x))) / delta)
    if method == "cd":
        return float((np.real(fn(x + delta)) - np.real(fn(x - delta))) / (2.0 * delta))
    if method == "cs":
        return float(np.imag(fn(_cplx(x, delta))) / delta)
    raise ValueError(f"unknown method {method!r}; expected fd, cd or cs")
