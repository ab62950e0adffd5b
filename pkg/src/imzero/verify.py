"""Monte-Carlo verification of the smoothing identities, as a pass/fail table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .objective import Quadratic, cubic, quartic
from .oracle import deriv_estimate
from .sampling import RngState
from .smoothing import (
    mc_f_delta,
    mc_grad_delta,
    mc_remainder_moment,
    mc_second_moment,
    moment_matrix,
    slope_fit,
)


@dataclass
class Check:
    name: str
    passed: bool
    detail: str
    points: list = field(default_factory=list)


@dataclass
class Report:
    checks: list
    paths: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = [f"{'check'.ljust(width)}  result  detail"]
        for c in self.checks:
            lines.append(f"{c.name.ljust(width)}  {'PASS' if c.passed else 'FAIL'}    {c.detail}")
        return "\n".join(lines)


SLOPE_DELTAS = tuple(np.logspace(-2, -1, 6))


def check_sphere_moment(M, seed):
    est = moment_matrix(5, M, RngState(seed, 1))
    err = float(np.linalg.norm(est.value - np.eye(5)))
    tol = 4.0 * float(np.linalg.norm(est.std_error))
    return Check("sphere moment n=5", err <= tol, f"|nE[uu^T]-I|_F={err:.2e} tol={tol:.2e}")


def check_f_delta_quadratic(M, seed):
    d, n = 0.1, 2
    est = mc_f_delta(Quadratic(n), np.zeros(n), d, M, RngState(seed, 2))
    target = -d * d * n / (2 * (n + 2))
    z = abs(est.value - target) / est.std_error
    return Check("f_delta quadratic identity", z <= 3.0, f"{est.value:.6e} vs {target:.6e} ({z:.2f} se)")


def check_f_delta_slope(M, seed):
    f = quartic()
    pts = [(d, abs(mc_f_delta(f, [1.0], d, M, RngState(seed, 3)).value - 1.0)) for d in SLOPE_DELTAS]
    s, _ = slope_fit(pts)
    return Check("f_delta bias slope (quartic)", abs(s - 2.0) <= 0.1, f"slope={s:.3f}", pts)


def check_grad_bias(M, seed):
    f = quartic(L2=24.0)
    pts, worst = [], 0.0
    for d in SLOPE_DELTAS:
        g = float(mc_grad_delta(f, [1.0], d, M, RngState(seed, 4)).value[0])
        bias = abs(g - 4.0)
        bound = f.n * d * d * f.L2 / 6.0
        worst = max(worst, abs(bias / bound - 1.0))
        pts.append((d, bias))
    s, _ = slope_fit(pts)
    ok = abs(s - 2.0) <= 0.1 and worst <= 0.05
    return Check("gradient bias slope and bound", ok, f"slope={s:.3f} max|bias/bound-1|={worst:.1e}", pts)


def check_second_moment(M, seed):
    n = 5
    x = np.full(n, 1.0 / math.sqrt(n))
    worst = 0.0
    for d in (1e-4, 1e-16, 1e-100):
        est = mc_second_moment(Quadratic(n), x, d, M, RngState(seed, 5))
        worst = max(worst, abs(est.value - n) / est.std_error)
    return Check("second moment quadratic", worst <= 5.0, f"max deviation {worst:.2f} se")


def check_excess_slope(M, seed):
    f = quartic()
    pts = []
    for d in SLOPE_DELTAS:
        est = mc_second_moment(f, [1.0], d, M, RngState(seed, 6))
        pts.append((d, abs(est.value - f.n * 16.0)))
    s, _ = slope_fit(pts)
    return Check("second-moment excess slope (quartic)", abs(s - 4.0) <= 0.3, f"slope={s:.3f}", pts)


def check_remainder_slope(M, seed):
    f = quartic(L2=24.0)
    pts = []
    for d in SLOPE_DELTAS:
        est = mc_remainder_moment(f, [1.0], d, M, RngState(seed, 7))
        pts.append((d, est.value))
    s, _ = slope_fit(pts)
    return Check("oracle remainder slope (quartic)", abs(s - 4.0) <= 0.3, f"slope={s:.3f}", pts)


def check_cs_floor():
    f = cubic()
    worst = max(abs(deriv_estimate("cs", f, 10.0, d) - 300.0) / 300.0
                for d in np.logspace(-8, -100, 93))
    return Check("complex-step floor x^3 at 10", worst <= 1e-12, f"max rel err={worst:.1e}")


def run_verification(seed: int = 0, M: int = 200_000, out=None) -> Report:
    checks = [
        check_cs_floor(),
        check_sphere_moment(M, seed),
        check_f_delta_quadratic(M, seed),
        check_f_delta_slope(M, seed),
        check_grad_bias(M, seed),
        check_second_moment(M, seed),
        check_excess_slope(M, seed),
        check_remainder_slope(M, seed),
    ]
    report = Report(checks)
    if out is not None:
        from .bench import write_table

        out = Path(out)
        rows = [[c.name, d, e] for c in checks for d, e in c.points]
        report.paths.append(write_table(out / "verify_points.csv", {"seed": seed, "samples": M},
                                        ["check", "delta", "error"], rows))
        report.paths.append(write_table(out / "verify_summary.csv", {"seed": seed, "samples": M},
                                        ["check", "passed"], [[c.name, c.passed] for c in checks]))
    return report
