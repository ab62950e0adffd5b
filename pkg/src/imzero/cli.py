"""Command-line entry point: ``imzero verify | run | suite``."""

from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import bench
from .errors import ImagRadiusExceeded, NoConvergence, NonFiniteIterate
from .objective import MpcParams, Objective, ObjectiveKind, load_matrix, make_objective
from .oracle import OracleKind
from .solver import Ball, Box, Constant, Fixed, Harmonic, NoProjection, SolverConfig, Stepsize

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(";") if v.strip()], dtype=float)


def _params(spec: str) -> tuple[str, dict]:
    name, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise UsageError(f"objective parameter {item!r} is not key=value")
        params[key.strip()] = val.strip()
    return name.strip(), params


def _take(params: dict, key: str, cast, default=None):
    if key not in params:
        return default
    try:
        return cast(params.pop(key))
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {exc}")


def build_objective(spec: str, seed: int) -> Objective:
    """Objective from ``name:key=value,...``; vectors use ``;`` separators."""
    name, p = _params(spec)
    try:
        kind = ObjectiveKind(name)
    except ValueError:
        raise UsageError(f"unknown objective {name!r}; choose from "
                         + ", ".join(k.value for k in ObjectiveKind))
    data = _take(p, "data", str)
    if kind is ObjectiveKind.QUADRATIC:
        obj = make_objective(kind, n=_take(p, "n", int, 1))
    elif kind is ObjectiveKind.WORST:
        obj = make_objective(kind, n=_take(p, "n", int, 5), L=_take(p, "L", float, 1e-8))
    elif kind is ObjectiveKind.PSEUDO_HUBER:
        lam, mu = _take(p, "lam", float, 1e-4), _take(p, "mu", float, 1e-4)
        if data:
            M = load_matrix(data)
            obj = make_objective(kind, A=M[:, :-1], b=M[:, -1], lam=lam, mu=mu)
        else:
            obj = bench.random_pseudo_huber(_take(p, "m", int, 4), _take(p, "n", int, 2), lam, mu, seed)
    elif kind is ObjectiveKind.LOGISTIC:
        if data:
            M = load_matrix(data)
            obj = make_objective(kind, A=M[:, :-1], labels=M[:, -1])
        else:
            obj = bench.random_logistic(_take(p, "m", int, 100), _take(p, "n", int, 2), seed)
    elif kind is ObjectiveKind.ROSENBROCK:
        obj = make_objective(kind, radius=_take(p, "radius", float, math.sqrt(2.0)))
    elif kind is ObjectiveKind.BOX_QP:
        lo, hi = _take(p, "lo", float, -1.0), _take(p, "hi", float, 1.0)
        c = _take(p, "c", _vector)
        if c is None:
            obj = bench.random_box_qp(_take(p, "n", int, 10), seed, lo, hi)
        else:
            obj = make_objective(kind, c=c, lo=lo, hi=hi)
    elif kind is ObjectiveKind.MPC:
        L1 = p.pop("L1", "40000")
        obj = make_objective(kind, params=dict(
            T=_take(p, "T", int, 4),
            x0=tuple(_take(p, "x0", _vector, np.array([3.0, 1.0]))),
            L1=L1 if L1 == "exact" else float(L1),
        ))
    else:
        coeffs = _take(p, "coeffs", _vector, np.array([0.0, 0.0, 0.5]))
        obj = make_objective(kind, coeffs=coeffs, n=_take(p, "n", int, 1),
                             L1=_take(p, "L1", float), L2=_take(p, "L2", float))
    if p:
        raise UsageError(f"unknown parameters for {name}: {', '.join(sorted(p))}")
    return obj


def parse_stepsize(text: str):
    if text.startswith("fixed="):
        try:
            return Fixed(float(text[len("fixed="):]))
        except ValueError as exc:
            raise UsageError(str(exc))
    try:
        return Stepsize(text)
    except ValueError:
        raise UsageError(f"unknown stepsize {text!r}; use cs-convex, cs-nonconvex, gs or fixed=V")


def parse_projection(text: str, n: int):
    if text == "none":
        return NoProjection()
    kind, _, val = text.partition("=")
    try:
        if kind == "box":
            lo, sep, hi = val.partition(":")
            if not sep:
                raise ValueError("box needs lo:hi")
            return Box(np.full(n, float(lo)), np.full(n, float(hi)))
        if kind == "ball":
            return Ball(float(val))
    except ValueError as exc:
        raise UsageError(f"bad projection {text!r}: {exc}")
    raise UsageError(f"unknown projection {text!r}; use none, box=lo:hi or ball=r")


def _oracle(text: str) -> OracleKind:
    try:
        return OracleKind(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid oracle {text!r} (choose from {', '.join(k.value for k in OracleKind)})")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an unsigned integer")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text!r} is outside the unsigned 64-bit range")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text!r} must be positive")
    return v


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="imzero", description="Complex-step zeroth-order optimisation toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="Monte-Carlo checks of the smoothing identities")
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--samples", type=_positive_int, default=200_000)
    v.add_argument("--out", type=Path)

    r = sub.add_parser("run", help="single solve, trace written as CSV")
    r.add_argument("--objective", required=True, help="name:key=value,... (vectors use ';')")
    r.add_argument("--oracle", type=_oracle, default=OracleKind.CS)
    r.add_argument("--delta", type=_positive_float, default=1e-16)
    r.add_argument("--schedule", choices=("const", "harmonic"), default="const")
    r.add_argument("--delta-bar", type=_positive_float,
                   help="cap for the harmonic schedule (default: objective's radius, or 1)")
    r.add_argument("--iters", type=_positive_int, default=1000)
    r.add_argument("--stepsize", default="cs-convex")
    r.add_argument("--project", default="none")
    r.add_argument("--x0", type=_vector, help="starting point, ';'-separated")
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--trials", type=_positive_int, default=1)
    r.add_argument("--stride", type=_positive_int)
    r.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("suite", help="reproduce one experiment")
    s.add_argument("name", choices=bench.EXPERIMENTS)
    s.add_argument("--out", type=Path, default=Path("results"))
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--trials", type=_positive_int)
    s.add_argument("--iters", type=_positive_int)
    s.add_argument("--delta", type=_positive_float, action="append", dest="deltas")
    s.add_argument("--oracle", type=_oracle, action="append", dest="oracles")
    return parser


def cmd_verify(args) -> int:
    from .verify import run_verification

    report = run_verification(seed=args.seed, M=args.samples, out=args.out)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_run(args) -> int:
    t0 = time.perf_counter()
    obj = build_objective(args.objective, args.seed)
    proj = parse_projection(args.project, obj.n)
    if args.schedule == "const":
        schedule = Constant(args.delta)
    else:
        cap = args.delta_bar
        if cap is None:
            cap = obj.delta_bar * (1 - 2**-52) if math.isfinite(obj.delta_bar) else 1.0
        schedule = Harmonic(args.delta, cap)
    if args.stride is not None and args.stride > args.iters:
        raise UsageError("--stride must not exceed --iters")
    x0 = obj.default_x0() if args.x0 is None else args.x0
    if x0.shape != (obj.n,):
        raise UsageError(f"--x0 needs {obj.n} entries, got {x0.size}")
    f_ref = bench.reference_value(obj, proj)
    config = SolverConfig(oracle=args.oracle, iters=args.iters, stepsize=parse_stepsize(args.stepsize),
                          schedule=schedule, projection=proj, seed=args.seed,
                          record_stride=args.stride, f_ref=f_ref)
    traces = bench.run_trials(obj, x0, config, args.trials)
    extra = {}
    data = bench.save_data(obj, str(args.out) + ".data.txt")
    if data is not None:
        extra["data"] = data.name
    path = bench.write_traces(args.out, traces, extra)
    bench.write_sidecar(path, time.perf_counter() - t0, argv=sys.argv[1:],
                        trial_wall_times=[round(t.wall_time, 6) for t in traces])
    print(f"wrote {path}")
    return EXIT_OK


def cmd_suite(args) -> int:
    spec = bench.ExperimentSpec(args.name, args.out, args.seed, args.trials, args.iters,
                                tuple(args.deltas) if args.deltas else None,
                                tuple(args.oracles) if args.oracles else None)
    if args.name == "verify":
        from .verify import run_verification

        report = run_verification(seed=args.seed, out=args.out)
        print(report.table())
        return EXIT_OK if report.passed else EXIT_VERIFY
    for p in bench.run_experiment(spec):
        print(f"wrote {p}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    handler = {"verify": cmd_verify, "run": cmd_run, "suite": cmd_suite}[args.command]
    try:
        return handler(args)
    except (UsageError, ImagRadiusExceeded, ValueError, OSError) as exc:
        print(f"imzero: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonFiniteIterate, NoConvergence) as exc:
        print(f"imzero: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
