"""Experiment harness: reference optima, CSV output and the reproduction suites.

Every data file written here is a pure function of the experiment settings
and seed. Timing information goes to a ``.meta.json`` sidecar next to it.
"""

from __future__ import annotations

import datetime as _dt
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NoConvergence
from .objective import (
    BoxQP,
    Logistic,
    MpcParams,
    MpcRollout,
    Objective,
    PseudoHuber,
    Quadratic,
    Rosenbrock,
    WorstFunction,
    cubic,
    mpc_receding_horizon,
    save_matrix,
)
from .oracle import OracleKind, deriv_estimate
from .sampling import RngState, ball_sample, gaussian_sample, split_stream
from .solver import (
    COLUMNS,
    Ball,
    Box,
    Constant,
    NoProjection,
    SolverConfig,
    Stepsize,
    Trace,
    run,
)

DATA_STREAM = 0xDA7A
ROSENBROCK_SEED = 4
EXPERIMENTS = ("deriv-sweep", "convex-suite", "dimension", "mpc", "rosenbrock", "verify")


# -- reference optima --------------------------------------------------------

@dataclass(frozen=True)
class Baseline:
    x_ref: np.ndarray
    f_ref: float
    method: str  # "closed-form" or "analytic-gradient-descent"
    residual: float
    iters: int = 0


def baseline_solve(obj: Objective, projection=NoProjection(), tol: float = 1e-12,
                   max_iter: int = 10**7, stepsize: float | None = None) -> Baseline:
    """Reference minimiser from the closed form or projected gradient descent.

    Descent uses the analytic gradient with step ``1/L1`` (or ``stepsize``)
    until a step shorter than ``tol``; hitting ``max_iter`` first raises
    :class:`NoConvergence` carrying the last iterate.
    """
    if obj.optimum is not None:
        x_star, f_star = obj.optimum
        if projection.contains(x_star):
            return Baseline(np.array(x_star), float(f_star), "closed-form", 0.0)
    if stepsize is None:
        if not (obj.L1 > 0 and math.isfinite(obj.L1)):
            raise ValueError("baseline descent needs a finite L1")
        stepsize = 1.0 / obj.L1
    x = projection(obj.default_x0() * 0.0)
    residual = math.inf
    for it in range(1, max_iter + 1):
        x_new = projection(x - stepsize * obj.grad_ref(x))
        step = x_new - x
        residual = math.sqrt(float(step @ step))
        x = x_new
        if residual <= tol:
            return Baseline(x, obj.eval_real(x), "analytic-gradient-descent", residual, it)
    partial = Baseline(x, obj.eval_real(x), "analytic-gradient-descent", residual, max_iter)
    raise NoConvergence(f"baseline residual {residual:.3e} after {max_iter} iterations", partial)


def reference_value(obj: Objective, projection=NoProjection()) -> float | None:
    """Gap reference for a run: closed form when feasible, else a baseline solve."""
    if obj.optimum is not None and projection.contains(obj.optimum[0]):
        return float(obj.optimum[1])
    if obj.kind.value == "rosenbrock" or not math.isfinite(obj.L1):
        return None
    stepsize = None
    if isinstance(obj, MpcRollout):
        stepsize = 1.0 / float(np.linalg.eigvalsh(obj.hessian)[-1])
    return baseline_solve(obj, projection, stepsize=stepsize).f_ref


# -- CSV output --------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    if v is None:
        return "none"
    return str(v)


def _header_lines(header: dict) -> list[str]:
    return [f"# {key}={fmt(val)}" for key, val in header.items()]


def trace_rows(trace: Trace) -> list[str]:
    cols = [trace.columns[c] for c in COLUMNS]
    return [",".join(fmt(c[i]) for c in cols) for i in range(len(trace))]


def write_traces(path, traces: Sequence[Trace], extra: dict | None = None) -> Path:
    """Write one or more traces sharing a configuration to a CSV file.

    The first trace's header is echoed as ``# key=value`` lines, then the
    column names, then each trace's rows preceded by a ``# trial=...`` line.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    head = dict(traces[0].header)
    for key in ("stream_id", "x0_projected"):
        head.pop(key, None)
    head.update(extra or {})
    for line in _header_lines(head):
        buf.write(line + "\n")
    buf.write(",".join(COLUMNS) + "\n")
    for t, tr in enumerate(traces):
        buf.write(f"# trial={t} stream_id={tr.header['stream_id']} "
                  f"x0_projected={fmt(tr.header['x0_projected'])}\n")
        for row in trace_rows(tr):
            buf.write(row + "\n")
    path.write_text(buf.getvalue())
    return path


def write_table(path, header: dict, names: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = _header_lines(header) + [",".join(names)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def write_sidecar(path, wall_time: float, **info) -> Path:
    side = Path(str(path) + ".meta.json")
    meta = {
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": round(wall_time, 6),
        **info,
    }
    side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return side


def read_trace_csv(path) -> tuple[dict, list[dict[str, np.ndarray]]]:
    """Parse a file written by :func:`write_traces` into (header, per-trial columns)."""
    header, trials, rows = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("# trial="):
            rows = []
            trials.append(rows)
        elif line.startswith("# "):
            key, _, val = line[2:].partition("=")
            header[key] = val
        elif line.startswith("k,"):
            continue
        elif line:
            rows.append([float(v) for v in line.split(",")])
    out = []
    for rows in trials:
        data = np.array(rows, dtype=float).reshape(-1, len(COLUMNS))
        out.append({c: data[:, i] for i, c in enumerate(COLUMNS)})
    return header, out


# -- parallel trials ---------------------------------------------------------

def worker_count() -> int:
    env = os.environ.get("IMZERO_THREADS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ValueError(f"IMZERO_THREADS must be a positive integer, got {env!r}")
        if value < 1:
            raise ValueError(f"IMZERO_THREADS must be a positive integer, got {env!r}")
        return value
    return os.cpu_count() or 1


def _call(task):
    fn, args = task
    return fn(*args)


def fan_out(fn: Callable, arg_list: Sequence[tuple]) -> list:
    """Apply ``fn`` to each argument tuple, in parallel when workers allow.

    Results come back in input order regardless of completion order.
    """
    workers = min(worker_count(), len(arg_list))
    if workers <= 1:
        return [fn(*args) for args in arg_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, [(fn, args) for args in arg_list]))


def trial_config(config: SolverConfig, trial: int) -> SolverConfig:
    child = split_stream(RngState(config.seed, config.stream_id), trial)
    return config.replace(stream_id=child.stream_id)


def run_trials(obj: Objective, x0, config: SolverConfig, trials: int) -> list[Trace]:
    """Independent runs on split streams of ``config``'s stream."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return fan_out(run, [(obj, x0, trial_config(config, t)) for t in range(trials)])


# -- data --------------------------------------------------------------------

def random_pseudo_huber(m: int, n: int, lam: float, mu: float, seed: int) -> PseudoHuber:
    rng = RngState(seed, DATA_STREAM)
    A = gaussian_sample(rng, n, m)
    b = gaussian_sample(rng, m)
    return PseudoHuber(A, b, lam, mu)


def random_logistic(m: int, n: int, seed: int) -> Logistic:
    rng = RngState(seed, DATA_STREAM + 1)
    A = gaussian_sample(rng, n, m)
    w = gaussian_sample(rng, n)
    noise = gaussian_sample(rng, m)
    labels = np.where(A @ w + noise >= 0, 1.0, -1.0)
    return Logistic(A, labels)


def random_box_qp(n: int, seed: int, lo=-1.0, hi=1.0) -> BoxQP:
    rng = RngState(seed, DATA_STREAM + 2)
    return BoxQP(gaussian_sample(rng, n), lo, hi)


def save_data(obj: Objective, path) -> Path | None:
    """Store the data matrix of a data-backed objective (target column last)."""
    if isinstance(obj, PseudoHuber):
        save_matrix(path, np.column_stack([obj.A, obj.b]))
    elif isinstance(obj, Logistic):
        save_matrix(path, np.column_stack([obj.A, obj.labels]))
    elif isinstance(obj, BoxQP):
        save_matrix(path, np.column_stack([obj.c, obj.lo, obj.hi]))
    else:
        return None
    return Path(path)


def rosenbrock_starts(count: int = 4, radius: float = math.sqrt(2.0),
                      seed: int = ROSENBROCK_SEED) -> np.ndarray:
    """Frozen random starting points inside the ball of the given radius."""
    return radius * ball_sample(RngState(seed, 0), 2, count)


def default_stepsize(kind: OracleKind, convex: bool = True):
    if OracleKind(kind).gaussian:
        return Stepsize.GS
    return Stepsize.CS_CONVEX if convex else Stepsize.CS_NONCONVEX


# -- experiments -------------------------------------------------------------

@dataclass
class ExperimentSpec:
    name: str
    out: Path = Path("results")
    seed: int = 0
    trials: int | None = None
    iters: int | None = None
    deltas: tuple[float, ...] | None = None
    oracles: tuple[OracleKind, ...] | None = None

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.trials is not None and self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.out = Path(self.out)
        if self.oracles is not None:
            self.oracles = tuple(OracleKind(o) for o in self.oracles)


def _label(v: float) -> str:
    return ("%g" % v).replace("-", "m").replace("+", "")


def exp_deriv_sweep(spec: ExperimentSpec) -> list[Path]:
    """Error of the three scalar derivative estimates of x³ over a log grid of steps."""
    t0 = time.perf_counter()
    f = cubic()
    grid = np.logspace(-1, -100, 100)
    paths = []
    for x in (-1.0, 0.0, 10.0):
        exact = 3.0 * x * x
        rows = []
        for d in grid:
            errs = [abs(deriv_estimate(m, f, x, d) - exact) for m in ("fd", "cd", "cs")]
            rows.append([d, *errs])
        p = write_table(spec.out / f"deriv_sweep_x{_label(x)}.csv",
                        {"function": "x^3", "x": x, "derivative": exact},
                        ["delta", "fd_err", "cd_err", "cs_err"], rows)
        paths.append(p)
    write_sidecar(spec.out / "deriv_sweep", time.perf_counter() - t0, experiment=spec.name)
    return paths


def convex_objectives(seed: int) -> dict[str, Objective]:
    return {
        "worst": WorstFunction(5, 1e-8),
        "pseudo_huber": random_pseudo_huber(4, 2, 1e-4, 1e-4, seed),
        "logistic": random_logistic(100, 2, seed),
    }


def exp_convex_suite(spec: ExperimentSpec) -> list[Path]:
    """Constant-delta comparison of the complex-step and Gaussian forward-difference methods."""
    t0 = time.perf_counter()
    K = spec.iters or 10**5
    trials = spec.trials or 1
    deltas = spec.deltas or (1e-6, 1e-10, 1e-14, 1e-16)
    oracles = spec.oracles or (OracleKind.CS, OracleKind.GSFD)
    paths = []
    for name, obj in convex_objectives(spec.seed).items():
        data = save_data(obj, spec.out / f"convex_{name}_data.txt")
        if data is not None:
            paths.append(data)
        f_ref = reference_value(obj)
        for kind in oracles:
            for d in deltas:
                cfg = SolverConfig(oracle=kind, iters=K, stepsize=default_stepsize(kind),
                                   schedule=Constant(d), seed=spec.seed, f_ref=f_ref)
                traces = run_trials(obj, np.zeros(obj.n), cfg, trials)
                paths.append(write_traces(
                    spec.out / f"convex_{name}_{kind.value}_d{_label(d)}.csv", traces))
    write_sidecar(spec.out / "convex_suite", time.perf_counter() - t0, experiment=spec.name)
    return paths


def theory_curves(n: int, K: int, stride: int) -> list[list[float]]:
    rows = []
    for k in list(range(0, K, stride)) + [K]:
        rows.append([k, 0.5 * (1 - 1 / (4 * n)) ** k, 0.5 * (1 - 1 / (8 * (n + 4))) ** k])
    return rows


def exp_dimension(spec: ExperimentSpec) -> list[Path]:
    """½‖x‖² from 𝟙/√n in growing dimension, with rate overlays."""
    t0 = time.perf_counter()
    K = spec.iters or 10**4
    trials = spec.trials or 20
    deltas = spec.deltas or (1e-6, 1e-16)
    oracles = spec.oracles or (OracleKind.CS, OracleKind.GSFD, OracleKind.GSCD)
    paths = []
    for n in (1, 100, 10000):
        obj = Quadratic(n)
        x0 = obj.default_x0()
        for kind in oracles:
            for d in deltas:
                cfg = SolverConfig(oracle=kind, iters=K, stepsize=default_stepsize(kind),
                                   schedule=Constant(d), seed=spec.seed)
                traces = run_trials(obj, x0, cfg, trials)
                paths.append(write_traces(
                    spec.out / f"dimension_n{n}_{kind.value}_d{_label(d)}.csv", traces))
        stride = max(1, K // 1000)
        paths.append(write_table(spec.out / f"dimension_n{n}_theory.csv", {"n": n},
                                 ["k", "cs_rate", "gs_rate"], theory_curves(n, K, stride)))
    write_sidecar(spec.out / "dimension", time.perf_counter() - t0, experiment=spec.name)
    return paths


def mpc_closed_loops(params: MpcParams, steps: int, config: SolverConfig):
    """Closed loops driven by the zeroth-order solver and by the analytic baseline."""
    box = Box(-params.u_max, params.u_max)

    def exact(obj):
        step = 1.0 / float(np.linalg.eigvalsh(obj.hessian)[-1])
        return baseline_solve(obj, box, stepsize=step).x_ref

    cs = mpc_receding_horizon(params, steps, config.replace(projection=box))
    ref = mpc_receding_horizon(params, steps, exact)
    return cs, ref


def exp_mpc(spec: ExperimentSpec, rollout_iters: int = 20000) -> list[Path]:
    """Single-horizon MPC solves plus a receding-horizon rollout against the baseline."""
    t0 = time.perf_counter()
    K = spec.iters or 10**6
    delta = (spec.deltas or (1e-16,))[0]
    oracles = spec.oracles or (OracleKind.CS, OracleKind.GSCD)
    params = MpcParams()
    obj = MpcRollout(params)
    box = Box(-params.u_max, params.u_max)
    f_ref = reference_value(obj, box)
    paths = []
    for kind in oracles:
        cfg = SolverConfig(oracle=kind, iters=K, stepsize=default_stepsize(kind),
                           schedule=Constant(delta), projection=box, seed=spec.seed, f_ref=f_ref)
        paths.append(write_traces(spec.out / f"mpc_single_{kind.value}.csv",
                                  [run(obj, np.zeros(obj.n), cfg)]))
    exact = MpcParams(L1="exact")
    cfg = SolverConfig(oracle=OracleKind.CS, iters=rollout_iters, stepsize=Stepsize.CS_CONVEX,
                       schedule=Constant(delta), projection=box, seed=spec.seed)
    cs, ref = mpc_closed_loops(exact, 15, cfg)
    rows = []
    for t in range(15):
        state = MpcRollout(exact.with_state(ref.states[t]))
        rows.append([t, *cs.states[t], *cs.inputs[t], *ref.states[t], *ref.inputs[t],
                     reference_value(state, box)])
    paths.append(write_table(
        spec.out / "mpc_rollout.csv",
        {"horizon": params.T, "delta": delta, "rollout_iters": rollout_iters, "L1": "exact"},
        ["step", "x1", "x2", "u", "x1_ref", "x2_ref", "u_ref", "f_ref"], rows))
    write_sidecar(spec.out / "mpc", time.perf_counter() - t0, experiment=spec.name)
    return paths


def rosenbrock_runs(K: int, seed: int = 0, oracles=(OracleKind.CS, OracleKind.GSCD),
                    deltas: dict | None = None, record_stride: int | None = None):
    """All (oracle, start) runs of the Rosenbrock comparison, as {(kind, i): Trace}."""
    obj = Rosenbrock()
    ball = Ball(obj.radius)
    deltas = deltas or {OracleKind.CS: 1e-10, OracleKind.GSCD: 1e-6, OracleKind.GSFD: 1e-6}
    starts = rosenbrock_starts(4, obj.radius)
    tasks, keys = [], []
    for kind in oracles:
        kind = OracleKind(kind)
        for i, x0 in enumerate(starts):
            cfg = SolverConfig(oracle=kind, iters=K, stepsize=default_stepsize(kind, convex=False),
                               schedule=Constant(deltas[kind]), projection=ball,
                               seed=seed, stream_id=i, record_stride=record_stride, record_x=True)
            tasks.append((obj, x0, cfg))
            keys.append((kind, i))
    return dict(zip(keys, fan_out(run, tasks)))


def exp_rosenbrock(spec: ExperimentSpec) -> list[Path]:
    """Four shared starts in the √2-ball, complex step against Gaussian central differences."""
    t0 = time.perf_counter()
    K = spec.iters or 10**6
    oracles = spec.oracles or (OracleKind.CS, OracleKind.GSCD)
    deltas = {OracleKind.CS: 1e-10, OracleKind.GSCD: 1e-6, OracleKind.GSFD: 1e-6}
    if spec.deltas:
        deltas = {k: spec.deltas[0] for k in deltas}
    results = rosenbrock_runs(K, spec.seed, oracles, deltas)
    paths = []
    for (kind, i), tr in results.items():
        stem = spec.out / f"rosenbrock_{kind.value}_start{i}"
        paths.append(write_traces(str(stem) + ".csv", [tr]))
        rows = [[k, *x] for k, x in zip(tr["k"], tr.xs)]
        paths.append(write_table(str(stem) + "_path.csv", {"start": i}, ["k", "x1", "x2"], rows))
    write_sidecar(spec.out / "rosenbrock", time.perf_counter() - t0, experiment=spec.name)
    return paths


def run_experiment(spec: ExperimentSpec) -> list[Path]:
    if spec.name == "verify":
        from .verify import run_verification

        report = run_verification(seed=spec.seed, out=spec.out)
        return report.paths
    table = {
        "deriv-sweep": exp_deriv_sweep,
        "convex-suite": exp_convex_suite,
        "dimension": exp_dimension,
        "mpc": exp_mpc,
        "rosenbrock": exp_rosenbrock,
    }
    return table[spec.name](spec)
