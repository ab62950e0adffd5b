"""Objective functions with real and complex evaluation.

Every objective is defined by a single formula that accepts real or complex
arrays of shape ``(..., n)``. Evaluating that formula at ``x + i*y`` gives the
holomorphic extension used by the complex-step oracle, and at real ``x`` it
gives the plain objective. Objectives are immutable after construction.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ImagRadiusExceeded

INF = math.inf


class ObjectiveKind(str, enum.Enum):
    QUADRATIC = "quadratic"
    WORST = "worst"
    PSEUDO_HUBER = "pseudo-huber"
    LOGISTIC = "logistic"
    ROSENBROCK = "rosenbrock"
    BOX_QP = "boxqp"
    MPC = "mpc"
    POLYNOMIAL = "polynomial"


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def _cplx(re, im):
    """Assemble a complex array from its parts without mixing them."""
    re = np.asarray(re, dtype=float)
    im = np.asarray(im, dtype=float)
    if re.shape != im.shape:
        re, im = np.broadcast_arrays(re, im)
    out = np.empty(re.shape, dtype=complex)
    out.real = re
    out.imag = im
    return out[()] if out.ndim == 0 else out


def _sum(w, div=None):
    """Sum over the last axis (optionally divided by ``div``).

    Complex parts are reduced as separate contiguous real arrays so that the
    real slot follows the real-input rounding sequence exactly.
    """
    if np.iscomplexobj(w):
        re = np.ascontiguousarray(w.real).sum(axis=-1)
        im = np.ascontiguousarray(w.imag).sum(axis=-1)
        if div is not None:
            re, im = re / div, im / div
        return _cplx(re, im)
    s = w.sum(axis=-1)
    return s if div is None else s / div


def _dot(z, m):
    # einsum keeps the per-row reduction order independent of how many rows
    # are evaluated at once, unlike BLAS
    return np.einsum("...i,ij->...j", z, m)


def _matmul(z, m):
    """``z @ m`` for real ``m``; complex ``z`` goes through two real products."""
    if np.iscomplexobj(z):
        return _cplx(_dot(np.ascontiguousarray(z.real), m), _dot(np.ascontiguousarray(z.imag), m))
    return _dot(z, m)


class Objective:
    """Base class: a black-box objective on R^n with a holomorphic extension.

    Subclasses implement :meth:`value` (the defining formula, vectorised over
    leading axes, real or complex) and :meth:`gradient` (analytic gradient).

    Attributes
    ----------
    n : int
        Dimension of the decision variable.
    L1, L2 : float
        Lipschitz constants of the gradient and of the Hessian
        (``math.inf`` when no global constant exists).
    tau : float or None
        Strong-convexity modulus when known.
    delta_bar : float
        Certified imaginary radius; ``math.inf`` for entire functions.
    optimum : tuple (x_star, f_star) or None
    """

    kind: ObjectiveKind
    n: int
    L1: float = INF
    L2: float = INF
    tau: float | None = None
    delta_bar: float = INF
    optimum: tuple[np.ndarray, float] | None = None

    def value(self, z):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"expected a vector of shape ({self.n},), got {x.shape}")
        return x

    def eval_real(self, x) -> float:
        """f(x) for a real vector ``x``."""
        return float(self.value(self._check(x)))

    def eval_complex(self, x, y) -> tuple[float, float]:
        """(Re f(x+iy), Im f(x+iy)).

        Raises :class:`ImagRadiusExceeded` when ``max|y| >= delta_bar``.
        """
        x = self._check(x)
        y = self._check(y)
        if self.delta_bar < INF or not np.all(np.isfinite(y)):
            radius = float(np.max(np.abs(y)))
            if not radius < self.delta_bar:
                raise ImagRadiusExceeded(
                    f"|y|_inf = {radius:.3e} is not below delta_bar = {self.delta_bar:.3e}"
                )
        w = self.value(_cplx(x, y))
        return float(w.real), float(w.imag)

    def grad_ref(self, x) -> np.ndarray:
        """Analytic gradient; used by verification and baselines only."""
        return np.asarray(self.gradient(self._check(x)), dtype=float)

    def default_x0(self) -> np.ndarray:
        return np.zeros(self.n)

    @property
    def f_star(self) -> float | None:
        return None if self.optimum is None else self.optimum[1]

    def describe(self) -> str:
        return f"{self.kind.value}:n={self.n}"

    def __repr__(self):
        return f"<{type(self).__name__} {self.describe()}>"


def _require_n(n):
    n = int(n)
    if n < 1:
        raise ValueError(f"dimension must be at least 1, got {n}")
    return n


def _require_positive(name, v):
    v = float(v)
    if not v > 0 or not math.isfinite(v):
        raise ValueError(f"{name} must be positive and finite, got {v}")
    return v


def _require_matrix(name, a, ncols=None):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {a.shape}")
    if ncols is not None and a.shape[1] != ncols:
        raise ValueError(f"{name} must have {ncols} columns, got {a.shape[1]}")
    return a


class Quadratic(Objective):
    """f(x) = ½‖x‖²."""

    kind = ObjectiveKind.QUADRATIC

    def __init__(self, n: int = 1):
        self.n = _require_n(n)
        self.L1, self.L2, self.tau = 1.0, 0.0, 1.0
        self.optimum = (_frozen(np.zeros(self.n)), 0.0)

    def value(self, z):
        return 0.5 * _sum(z * z)

    def gradient(self, x):
        return np.array(x, dtype=float)

    def default_x0(self):
        return np.full(self.n, 1.0 / math.sqrt(self.n))


class WorstFunction(Objective):
    r"""Nesterov's tridiagonal quadratic, scaled by ``L``.

    f(x) = L * (½[x_1² + Σ (x_{i+1} - x_i)² + x_n²] - x_1)
    """

    kind = ObjectiveKind.WORST

    def __init__(self, n: int = 5, L: float = 1e-8):
        self.n = _require_n(n)
        self.L = _require_positive("L", L)
        self.L1 = 4.0 * self.L
        self.L2 = 0.0
        # smallest eigenvalue of the tridiagonal (2, -1) matrix
        self.tau = self.L * (2.0 - 2.0 * math.cos(math.pi / (self.n + 1)))
        i = np.arange(1, self.n + 1)
        x_star = 1.0 - i / (self.n + 1)
        f_star = -0.5 * self.L * (1.0 - 1.0 / (self.n + 1))
        self.optimum = (_frozen(x_star), f_star)

    def value(self, z):
        head = z[..., 0]
        tail = z[..., -1]
        diff = z[..., 1:] - z[..., :-1]
        quad = head * head + _sum(diff * diff) + tail * tail
        return self.L * (0.5 * quad - head)

    def gradient(self, x):
        g = 2.0 * x
        g[1:] -= x[:-1]
        g[:-1] -= x[1:]
        g[0] -= 1.0
        return self.L * g

    def describe(self):
        return f"worst:n={self.n},L={self.L:g}"


def pseudo_huber(z, mu: float):
    """μ Σ (sqrt(1 + z²/μ²) - 1) along the last axis."""
    inv = 1.0 / (mu * mu)
    return mu * _sum(np.sqrt(1.0 + (z * z) * inv) - 1.0)


class PseudoHuber(Objective):
    """½‖Ax - b‖² + λ ψ_μ(x).

    The extension has branch points at x_j = ±iμ, so the certified radius is μ.
    """

    kind = ObjectiveKind.PSEUDO_HUBER

    def __init__(self, A, b, lam: float = 1e-4, mu: float = 1e-4):
        A = _require_matrix("A", A)
        b = np.asarray(b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b must have {A.shape[0]} entries, got {b.shape[0]}")
        self.A, self.b = _frozen(A), _frozen(b)
        self.At = _frozen(A.T)
        self.m, self.n = A.shape
        self.lam = _require_positive("lam", lam)
        self.mu = _require_positive("mu", mu)
        self.L1 = self.lam / self.mu + float(np.linalg.norm(A.T @ A, 2))
        self.L2 = self.lam / self.mu**2
        self.delta_bar = self.mu

    def value(self, z):
        r = _matmul(z, self.At) - self.b
        return 0.5 * _sum(r * r) + self.lam * pseudo_huber(z, self.mu)

    def gradient(self, x):
        r = self.A @ x - self.b
        return self.At @ r + self.lam * x / (self.mu * np.sqrt(1.0 + (x / self.mu) ** 2))

    def describe(self):
        return f"pseudo-huber:m={self.m},n={self.n},lam={self.lam:g},mu={self.mu:g}"


def _softplus(t):
    """log(1 + exp(t)) for real or complex t, overflow-safe.

    Complex inputs are handled through explicit real/imaginary parts so that a
    zero imaginary part reproduces the real evaluation bit for bit.
    """
    a = np.real(t)
    pos = a > 0
    lead = np.maximum(a, 0.0)
    sr = -np.abs(a)
    if not np.iscomplexobj(t):
        return lead + np.log1p(np.exp(sr))
    b = np.imag(t)
    si = np.where(pos, -b, b)
    mag = np.exp(sr)
    wr = mag * np.cos(si)
    wi = mag * np.sin(si)
    one_wr = 1.0 + wr
    q = wi / one_wr
    re = lead + (np.log1p(wr) + 0.5 * np.log1p(q * q))
    im = np.where(pos, b, 0.0) + np.arctan2(wi, one_wr)
    return _cplx(re, im)


class Logistic(Objective):
    """(1/m) Σ log(1 + exp(-y_i a_iᵀx)).

    Poles of the extension sit where the imaginary part of ``-y_i a_iᵀz`` hits
    an odd multiple of π; ``delta_bar`` keeps that part below π/2 for any
    ``y`` with ``max|y| < delta_bar``.
    """

    kind = ObjectiveKind.LOGISTIC

    def __init__(self, A, labels):
        A = _require_matrix("A", A)
        labels = np.asarray(labels, dtype=float).reshape(-1)
        if labels.shape[0] != A.shape[0]:
            raise ValueError(f"need {A.shape[0]} labels, got {labels.shape[0]}")
        if not np.all(np.isin(labels, (-1.0, 1.0))):
            raise ValueError("labels must be -1 or 1")
        self.A, self.labels = _frozen(A), _frozen(labels)
        self.m, self.n = A.shape
        self._M = _frozen(-(labels[:, None] * A).T)  # t = z @ M
        self.L1 = 0.25 * float(np.linalg.norm(A, 2))
        self.L2 = INF
        row_max = float(np.max(np.linalg.norm(A, axis=1)))
        self.delta_bar = min(1.0, math.pi / (2.0 * math.sqrt(self.n) * row_max))

    def value(self, z):
        t = _matmul(z, self._M)
        return _sum(_softplus(t), self.m)

    def gradient(self, x):
        t = x @ self._M
        sig = 0.5 * (1.0 + np.tanh(0.5 * t))
        return (self._M @ sig) / self.m

    def describe(self):
        return f"logistic:m={self.m},n={self.n}"


def _rosenbrock_lipschitz(radius: float) -> float:
    """Max spectral norm of the Rosenbrock Hessian over the disc of given radius."""
    r = np.linspace(0.0, radius, 401)[:, None]
    th = np.linspace(0.0, 2.0 * math.pi, 4001)[None, :]
    x1, x2 = r * np.cos(th), r * np.sin(th)
    h11 = 1200.0 * x1 * x1 - 400.0 * x2 + 2.0
    h12 = -400.0 * x1
    h22 = 200.0
    mid = 0.5 * (h11 + h22)
    rad = np.sqrt((0.5 * (h11 - h22)) ** 2 + h12 * h12)
    return float(np.max(np.maximum(np.abs(mid + rad), np.abs(mid - rad))))


class Rosenbrock(Objective):
    """(1 - x_1)² + 100 (x_2 - x_1²)², with Lipschitz data over a ball.

    ``radius`` is the radius of the feasible ball centred at the origin; the
    Lipschitz constants are taken over that ball.
    """

    kind = ObjectiveKind.ROSENBROCK

    def __init__(self, radius: float = math.sqrt(2.0)):
        self.n = 2
        self.radius = _require_positive("radius", radius)
        self.L1 = _rosenbrock_lipschitz(self.radius)
        # third derivatives: 2400 x_1 and -400 (twice)
        self.L2 = math.sqrt((2400.0 * self.radius) ** 2 + 3 * 400.0**2)
        self.optimum = (_frozen([1.0, 1.0]), 0.0)

    def value(self, z):
        a = z[..., 0]
        b = z[..., 1]
        p = 1.0 - a
        q = b - a * a
        return p * p + 100.0 * (q * q)

    def gradient(self, x):
        a, b = x
        q = b - a * a
        return np.array([-2.0 * (1.0 - a) - 400.0 * a * q, 200.0 * q])

    def default_x0(self):
        return np.array([-1.0, 0.0])

    def describe(self):
        return f"rosenbrock:radius={self.radius:g}"


class BoxQP(Objective):
    """½‖x - c‖² restricted to the box [lo, hi]; the optimum is clip(c)."""

    kind = ObjectiveKind.BOX_QP

    def __init__(self, c, lo=-1.0, hi=1.0):
        c = np.asarray(c, dtype=float).reshape(-1)
        self.n = _require_n(c.size)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), c.shape)
        hi = np.broadcast_to(np.asarray(hi, dtype=float), c.shape)
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi")
        self.c, self.lo, self.hi = _frozen(c), _frozen(lo), _frozen(hi)
        self.L1, self.L2, self.tau = 1.0, 0.0, 1.0
        x_star = np.clip(c, lo, hi)
        self.optimum = (_frozen(x_star), float(self.value(x_star)))

    def value(self, z):
        d = z - self.c
        return 0.5 * _sum(d * d)

    def gradient(self, x):
        return x - self.c

    def describe(self):
        return f"boxqp:n={self.n}"


@dataclass(frozen=True)
class MpcParams:
    """Linear MPC instance: dynamics (A, B), costs (Q, R), horizon T, state x0."""

    A: tuple = ((1.0, 1.0), (0.0, 1.0))
    B: tuple = ((0.5,), (1.0,))
    Q: tuple = ((1.0, 0.0), (0.0, 1.0))
    R: tuple = ((1.0,),)
    T: int = 4
    x0: tuple = (3.0, 1.0)
    L1: float | str = 4e4
    u_max: float = 1.0

    def with_state(self, x0) -> "MpcParams":
        return MpcParams(self.A, self.B, self.Q, self.R, self.T,
                         tuple(float(v) for v in np.ravel(x0)), self.L1, self.u_max)


class MpcRollout(Objective):
    """Finite-horizon MPC cost as a function of the stacked input sequence.

    f(u) = Σ_{t<T} x_tᵀQx_t + u_tᵀRu_t + x_TᵀQx_T with x_{t+1} = A x_t + B u_t.
    ``L1`` is either a number (default: a rough 4e4 estimate) or ``"exact"``
    for the largest Hessian eigenvalue.
    """

    kind = ObjectiveKind.MPC

    def __init__(self, params: MpcParams = MpcParams()):
        self.params = params
        A = np.atleast_2d(np.asarray(params.A, dtype=float))
        B = np.asarray(params.B, dtype=float).reshape(A.shape[0], -1)
        Q = np.atleast_2d(np.asarray(params.Q, dtype=float))
        R = np.atleast_2d(np.asarray(params.R, dtype=float))
        T = int(params.T)
        if T < 1:
            raise ValueError(f"horizon must be >= 1, got {T}")
        nx, nu = B.shape
        x0 = np.asarray(params.x0, dtype=float).reshape(nx)
        self.A, self.B, self.Q, self.R = map(_frozen, (A, B, Q, R))
        self.T, self.nx, self.nu = T, nx, nu
        self.x0 = _frozen(x0)
        self.n = T * nu
        # stacked states x_1..x_T = h + G u
        powers = [np.eye(nx)]
        for _ in range(T):
            powers.append(A @ powers[-1])
        G = np.zeros((T * nx, T * nu))
        for t in range(T):
            for s in range(t + 1):
                G[t * nx:(t + 1) * nx, s * nu:(s + 1) * nu] = powers[t - s] @ B
        h = np.concatenate([powers[t + 1] @ x0 for t in range(T)])
        self._Gt = _frozen(G.T)
        self._h = _frozen(h)
        self._Qbar = _frozen(np.kron(np.eye(T), Q))
        self._Rbar = _frozen(np.kron(np.eye(T), R))
        self._c0 = float(x0 @ Q @ x0)
        H = 2.0 * (G.T @ self._Qbar @ G + self._Rbar)
        eig = np.linalg.eigvalsh(H)
        self.hessian = _frozen(H)
        self.tau = float(eig[0])
        self.L1 = float(eig[-1]) if params.L1 == "exact" else _require_positive("L1", params.L1)
        self.L2 = 0.0
        self.u_max = float(params.u_max)

    def value(self, z):
        xs = _matmul(z, self._Gt) + self._h
        state = _sum(_matmul(xs, self._Qbar) * xs)
        inputs = _sum(_matmul(z, self._Rbar) * z)
        return self._c0 + state + inputs

    def rollout(self, u):
        """States x_0..x_T under the input sequence ``u`` (simulated step by step)."""
        u = np.asarray(u, dtype=float).reshape(self.T, self.nu)
        xs = [np.array(self.x0)]
        for t in range(self.T):
            xs.append(self.A @ xs[-1] + self.B @ u[t])
        return np.array(xs)

    def gradient(self, x):
        # adjoint recursion backwards through the dynamics
        u = np.asarray(x, dtype=float).reshape(self.T, self.nu)
        xs = self.rollout(u)
        g = np.empty_like(u)
        lam = 2.0 * self.Q @ xs[self.T]
        for t in range(self.T - 1, -1, -1):
            g[t] = 2.0 * self.R @ u[t] + self.B.T @ lam
            lam = 2.0 * self.Q @ xs[t] + self.A.T @ lam
        return g.reshape(-1)

    def describe(self):
        return f"mpc:T={self.T},x0={';'.join(f'{v:g}' for v in self.x0)},L1={self.L1:g}"


class Polynomial(Objective):
    """Separable polynomial f(x) = Σ_j Σ_p c_p x_j^p (Horner in each coordinate).

    Covers the scalar test functions used for verification (cubic, quartic,
    constants, linear maps). Lipschitz constants are global when the degree is
    at most 2, otherwise infinite unless overridden with local values.
    """

    kind = ObjectiveKind.POLYNOMIAL

    def __init__(self, coeffs, n: int = 1, L1: float | None = None, L2: float | None = None):
        self.coeffs = _frozen(np.atleast_1d(coeffs))
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-D sequence")
        self.n = _require_n(n)
        deg = int(np.max(np.flatnonzero(self.coeffs), initial=0))
        self.degree = deg
        if deg <= 2:
            c2 = self.coeffs[2] if deg == 2 else 0.0
            self.L1, self.L2 = 2.0 * abs(float(c2)), 0.0
            if c2 > 0:
                self.tau = 2.0 * float(c2)
        if L1 is not None:
            self.L1 = float(L1)
        if L2 is not None:
            self.L2 = float(L2)

    def value(self, z):
        if self.coeffs.size == 1:
            acc = z * 0.0 + self.coeffs[0]
            return _sum(acc)
        acc = self.coeffs[-1] * z
        for c in self.coeffs[-2:0:-1]:
            acc = (acc + c) * z
        acc = acc + self.coeffs[0]
        return _sum(acc)

    def gradient(self, x):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(x, d) if d.size else np.zeros_like(x)

    def __call__(self, z):
        """Scalar evaluation for one-dimensional use (derivative estimators)."""
        return self.value(np.asarray([z]))

    def describe(self):
        return f"polynomial:n={self.n},coeffs={list(self.coeffs)}"


def cubic(n: int = 1) -> Polynomial:
    return Polynomial([0.0, 0.0, 0.0, 1.0], n=n)


def quartic(n: int = 1, L2: float | None = None) -> Polynomial:
    return Polynomial([0.0, 0.0, 0.0, 0.0, 1.0], n=n, L2=L2)


_FACTORIES: dict[ObjectiveKind, Callable[..., Objective]] = {
    ObjectiveKind.QUADRATIC: Quadratic,
    ObjectiveKind.WORST: WorstFunction,
    ObjectiveKind.PSEUDO_HUBER: PseudoHuber,
    ObjectiveKind.LOGISTIC: Logistic,
    ObjectiveKind.ROSENBROCK: Rosenbrock,
    ObjectiveKind.BOX_QP: BoxQP,
    ObjectiveKind.POLYNOMIAL: Polynomial,
}


def make_objective(kind, params: dict | None = None, **kwargs) -> Objective:
    """Build a zoo member from its kind and kind-specific parameters.

    >>> make_objective("worst", n=5, L=1e-8).L1
    4e-08
    """
    kind = ObjectiveKind(kind)
    params = {**(params or {}), **kwargs}
    if kind is ObjectiveKind.MPC:
        return MpcRollout(MpcParams(**params))
    return _FACTORIES[kind](**params)


def load_matrix(path) -> np.ndarray:
    """Read a whitespace-separated float matrix, one row per line."""
    with warnings.catch_warnings():
        # an empty file is reported below as an error
        warnings.simplefilter("ignore", UserWarning)
        data = np.loadtxt(path, dtype=float, ndmin=2)
    if data.size == 0:
        raise ValueError(f"{path}: empty matrix file")
    return data


def save_matrix(path, data) -> None:
    np.savetxt(path, np.atleast_2d(data), fmt="%.17g")


class ClosedLoop(NamedTuple):
    states: np.ndarray  # (steps + 1, nx)
    inputs: np.ndarray  # (steps, nu)


def mpc_receding_horizon(params: MpcParams, steps: int, inner) -> ClosedLoop:
    """Receding-horizon closed loop: solve, apply the first input, advance.

    ``inner`` is either a :class:`~imzero.solver.SolverConfig` (zeroth-order
    inner solve from ``u = 0`` with the ±u_max box) or a callable mapping an
    :class:`MpcRollout` to its input sequence.
    """
    from .sampling import RngState, split_stream
    from .solver import Box, SolverConfig, run

    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if isinstance(inner, SolverConfig):
        proj = inner.projection
        if not isinstance(proj, Box) or not (
            np.all(proj.lo == -params.u_max) and np.all(proj.hi == params.u_max)
        ):
            raise ValueError("inner solver must project onto the input box")
        cfg = inner
        root = RngState(cfg.seed, cfg.stream_id)

        def solve(obj, step):
            child = split_stream(root, step)
            trace = run(obj, np.zeros(obj.n), cfg.replace(stream_id=child.stream_id))
            return trace.x_final
    else:
        def solve(obj, step):
            return np.asarray(inner(obj), dtype=float)

    x = np.asarray(params.x0, dtype=float)
    states, inputs = [x], []
    for step in range(steps):
        obj = MpcRollout(params.with_state(x))
        u = solve(obj, step).reshape(obj.T, obj.nu)[0]
        x = obj.A @ x + obj.B @ u
        states.append(x)
        inputs.append(u)
    return ClosedLoop(np.array(states), np.array(inputs))
