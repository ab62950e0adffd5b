"""Randomised zeroth-order descent with optional projection.

One oracle call per iteration, ``x <- P(x - mu * g)``, with a running average
of all iterates kept alongside. The same loop covers the unconstrained and
the projected variants; ``NoProjection`` makes the projection the identity.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ImagRadiusExceeded, NonFiniteIterate
from .objective import Objective
from .oracle import OracleKind, draw_direction
from .sampling import RngState

COLUMNS = ("k", "f_xk", "f_xbar", "gap_xk", "gap_xbar", "delta_k", "g_norm", "cum_evals")


# -- stepsizes ---------------------------------------------------------------

class Stepsize(str, enum.Enum):
    CS_CONVEX = "cs-convex"
    CS_NONCONVEX = "cs-nonconvex"
    GS = "gs"


@dataclass(frozen=True)
class Fixed:
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"fixed stepsize must be positive and finite, got {self.value}")

    def __str__(self):
        return f"fixed={self.value!r}"


def resolve_stepsize(policy, n: int, L1: float) -> float:
    """Closed-form stepsize for ``policy`` in dimension ``n`` with gradient constant ``L1``."""
    if isinstance(policy, Fixed):
        return float(policy.value)
    policy = Stepsize(policy)
    if not (L1 > 0 and math.isfinite(L1)):
        raise ValueError(f"stepsize policy {policy.value} needs a finite positive L1, got {L1}")
    if policy is Stepsize.CS_CONVEX:
        return 1.0 / (2.0 * n * L1)
    if policy is Stepsize.CS_NONCONVEX:
        return 1.0 / (n * L1)
    return 1.0 / (4.0 * (n + 4) * L1)


# -- smoothing schedules -----------------------------------------------------

@dataclass(frozen=True)
class Constant:
    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def at(self, k: int) -> float:
        return self.delta

    def __str__(self):
        return f"const({self.delta!r})"


@dataclass(frozen=True)
class Harmonic:
    """delta_k = min(delta_bar, delta / (k + 1))."""

    delta: float
    delta_bar: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.delta_bar > 0:
            raise ValueError(f"delta_bar must be positive, got {self.delta_bar}")

    def at(self, k: int) -> float:
        return min(self.delta_bar, self.delta / (k + 1))

    def __str__(self):
        return f"harmonic({self.delta!r},{self.delta_bar!r})"


def delta_at(schedule, k: int) -> float:
    return schedule.at(int(k))


# -- projections -------------------------------------------------------------

@dataclass(frozen=True)
class NoProjection:
    def __call__(self, x):
        return x

    def contains(self, x, tol: float = 0.0) -> bool:
        return True

    def __str__(self):
        return "none"


@dataclass(frozen=True, eq=False)
class Box:
    """Componentwise bounds; scalars broadcast to every coordinate."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __call__(self, x):
        _match(self.lo, x)
        _match(self.hi, x)
        return np.minimum(np.maximum(x, self.lo), self.hi)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def __str__(self):
        return f"box={_fmt(self.lo)}:{_fmt(self.hi)}"


@dataclass(frozen=True, eq=False)
class Ball:
    radius: float
    center: np.ndarray | float = 0.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))

    def __call__(self, x):
        _match(self.center, x)
        d = x - self.center
        r = math.sqrt(float(d @ d)) if d.ndim == 1 else float(np.linalg.norm(d))
        if r <= self.radius:
            return x
        return self.center + d * (self.radius / r)

    def contains(self, x, tol: float = 0.0) -> bool:
        return float(np.linalg.norm(x - self.center)) <= self.radius + tol

    def __str__(self):
        return f"ball={self.radius!r}"


def _match(bound, x):
    if bound.ndim and bound.shape != np.shape(x):
        raise ValueError(f"projection expects shape {bound.shape}, got {np.shape(x)}")


def _fmt(a):
    a = np.asarray(a)
    return repr(float(a)) if a.ndim == 0 else ";".join(repr(float(v)) for v in a)


def project(p, x) -> np.ndarray:
    """Euclidean projection of ``x`` onto the set described by ``p``."""
    return p(np.asarray(x, dtype=float))


# -- configuration and trace ---------------------------------------------------

@dataclass(frozen=True)
class SolverConfig:
    oracle: OracleKind = OracleKind.CS
    iters: int = 1000
    stepsize: Stepsize | Fixed = Stepsize.CS_CONVEX
    schedule: Constant | Harmonic = Constant(1e-16)
    projection: NoProjection | Box | Ball = NoProjection()
    seed: int = 0
    stream_id: int = 0
    record_stride: int | None = None
    record_x: bool = False
    f_ref: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "oracle", OracleKind(self.oracle))
        if not isinstance(self.stepsize, Fixed):
            object.__setattr__(self, "stepsize", Stepsize(self.stepsize))
        if int(self.iters) < 1:
            raise ValueError(f"iters must be >= 1, got {self.iters}")
        if self.record_stride is not None and not 1 <= self.record_stride <= self.iters:
            raise ValueError(f"record_stride must lie in [1, iters], got {self.record_stride}")

    @property
    def stride(self) -> int:
        if self.record_stride is not None:
            return int(self.record_stride)
        return max(1, int(self.iters) // 1000)

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def echo(self) -> dict:
        step = self.stepsize if isinstance(self.stepsize, Fixed) else self.stepsize.value
        return {
            "oracle": self.oracle.value,
            "iters": int(self.iters),
            "stepsize": str(step),
            "schedule": str(self.schedule),
            "projection": str(self.projection),
            "seed": int(self.seed),
            "stream_id": int(self.stream_id),
            "record_stride": self.stride,
        }


@dataclass
class Trace:
    """Recorded iterates of one run.

    ``columns`` maps each name in :data:`COLUMNS` to an array with one entry
    per record. ``xs`` holds the recorded iterates when requested.
    ``wall_time`` is kept out of ``header`` so that the header is reproducible.
    """

    header: dict
    columns: dict
    x_final: np.ndarray
    xbar_final: np.ndarray
    xs: np.ndarray | None = None
    wall_time: float = 0.0

    def __getitem__(self, name):
        return self.columns[name]

    def __len__(self):
        return len(self.columns["k"])


class _Recorder:
    def __init__(self, obj, f_ref, record_x):
        self.obj = obj
        self.f_ref = f_ref
        self.rows = []
        self.xs = [] if record_x else None

    def add(self, k, x, xbar, delta, evals):
        f = float(self.obj.value(x))
        fb = float(self.obj.value(xbar))
        ref = self.f_ref
        gap, gapb = (math.nan, math.nan) if ref is None else (f - ref, fb - ref)
        self.rows.append([k, f, fb, gap, gapb, delta, math.nan, evals])
        if self.xs is not None:
            self.xs.append(x.copy())

    def set_gnorm(self, g):
        self.rows[-1][6] = math.sqrt(float(g @ g))

    def columns(self):
        data = np.array(self.rows, dtype=float).reshape(-1, len(COLUMNS))
        cols = {name: data[:, i].copy() for i, name in enumerate(COLUMNS)}
        cols["k"] = cols["k"].astype(np.int64)
        cols["cum_evals"] = cols["cum_evals"].astype(np.int64)
        return cols


def strong_convexity_offset(obj: Objective, x0, delta: float) -> float | None:
    """Asymptotic offset of the strongly convex rate with unit constants.

    delta² n L1/tau * (‖x0 - x*‖² L2/L1 + delta² L2²/L1²); ``None`` unless tau and
    the optimum are known.
    """
    if obj.tau is None or obj.tau <= 0 or obj.optimum is None:
        return None
    if not (math.isfinite(obj.L1) and math.isfinite(obj.L2) and obj.L1 > 0):
        return None
    d = np.asarray(x0, dtype=float) - obj.optimum[0]
    L1, L2 = obj.L1, obj.L2
    return delta**2 * obj.n * L1 / obj.tau * (float(d @ d) * L2 / L1 + delta**2 * L2**2 / L1**2)


def build_header(obj: Objective, x0, config: SolverConfig, f_ref, projected: bool) -> dict:
    header = {"objective": obj.describe(), **config.echo()}
    header["f_ref"] = f_ref
    header["x0_projected"] = projected
    nu = strong_convexity_offset(obj, x0, delta_at(config.schedule, 0))
    if nu is not None:
        header["nu"] = nu
        header["rate"] = 1.0 - obj.tau / (4.0 * obj.n * obj.L1)
    return header


def _block_rows(n):
    return max(1, (1 << 16) // n)


@np.errstate(over="ignore", invalid="ignore")
def run(obj: Objective, x0, config: SolverConfig) -> Trace:
    """Run ``config.iters`` iterations of zeroth-order descent from ``x0``.

    Raises :class:`NonFiniteIterate` with the partial trace attached when an
    iterate stops being finite, and :class:`ImagRadiusExceeded` when the
    complex-step offset leaves the certified strip.
    """
    t_start = time.perf_counter()
    n = obj.n
    K = int(config.iters)
    kind = config.oracle
    proj = config.projection
    mu = resolve_stepsize(config.stepsize, n, obj.L1)
    schedule = config.schedule
    stride = config.stride

    x = np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ValueError(f"x0 must have shape ({n},), got {x.shape}")
    projected = not proj.contains(x)
    if projected:
        x = project(proj, x)

    if kind is OracleKind.CS and not schedule.at(0) < obj.delta_bar:
        raise ImagRadiusExceeded(
            f"initial delta {schedule.at(0)!r} is not below delta_bar {obj.delta_bar!r}"
        )

    f_ref = config.f_ref if config.f_ref is not None else obj.f_star
    header = build_header(obj, x, config, f_ref, projected)
    rec = _Recorder(obj, f_ref, config.record_x)
    rng = RngState(config.seed, config.stream_id)
    per_call = kind.evals
    value = obj.value
    xbar = x.copy()
    rows = _block_rows(n)
    block = None
    j = rows

    def finish(k_last):
        cols = rec.columns()
        xs = np.array(rec.xs) if rec.xs is not None else None
        return Trace(header, cols, x.copy(), xbar.copy(), xs, time.perf_counter() - t_start)

    for k in range(K):
        d = schedule.at(k)
        recording = k % stride == 0
        if recording:
            rec.add(k, x, xbar, d, k * per_call)
        if j == rows:
            block = draw_direction(kind, rng, n, min(rows, K - k))
            if kind is OracleKind.CS:
                # d * (1j * u) has real part +0 and imaginary part d * u exactly
                iblock = 1j * block
            j = 0
        u = block[j]
        j += 1
        if kind is OracleKind.CS:
            im = value(x + d * iblock[j - 1]).imag
            g = (n * float(im) / d) * u
        elif kind is OracleKind.TP:
            g = (n * (float(value(x + d * u)) - float(value(x))) / d) * u
        elif kind is OracleKind.GSCD:
            g = ((float(value(x + d * u)) - float(value(x - d * u))) / (2.0 * d)) * u
        elif kind is OracleKind.GSFD:
            g = ((float(value(x + d * u)) - float(value(x))) / d) * u
        else:
            g = (n * float(value(x + d * u)) / d) * u
        if recording:
            rec.set_gnorm(g)
        x = proj(x - mu * g)
        if not math.isfinite(x.sum()) and not np.isfinite(x).all():
            trace = finish(k)
            raise NonFiniteIterate(f"iterate became non-finite at iteration {k + 1}", trace)
        xbar += (x - xbar) / (k + 2)

    rec.add(K, x, xbar, schedule.at(K), K * per_call)
    return finish(K)


def average_point(iterates) -> np.ndarray:
    """Running mean of a sequence of iterates using the solver's update rule."""
    it = iter(iterates)
    xbar = np.array(next(it), dtype=float)
    for j, x in enumerate(it, start=2):
        xbar += (np.asarray(x, dtype=float) - xbar) / j
    return xbar
