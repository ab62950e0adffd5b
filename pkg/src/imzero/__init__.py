"""Zeroth-order optimisation with the complex-step gradient oracle.

Objectives expose real and complex evaluation; the complex-step oracle reads
a directional derivative from one complex evaluation, free of subtractive
cancellation, and drives randomised (projected) descent.
"""

from .errors import ImagRadiusExceeded, NoConvergence, NonFiniteIterate
from .objective import (
    BoxQP,
    Logistic,
    MpcParams,
    MpcRollout,
    Objective,
    ObjectiveKind,
    Polynomial,
    PseudoHuber,
    Quadratic,
    Rosenbrock,
    WorstFunction,
    cubic,
    make_objective,
    mpc_receding_horizon,
    quartic,
)
from .oracle import (
    GradEstimate,
    OracleKind,
    cs_gradient,
    deriv_estimate,
    gs_cd_gradient,
    gs_fd_gradient,
    oracle_dispatch,
    sp_gradient,
    tp_gradient,
)
from .sampling import RngState, ball_sample, gaussian_sample, sphere_sample, split_stream
from .smoothing import (
    McEstimate,
    mc_f_delta,
    mc_grad_delta,
    mc_remainder_moment,
    mc_second_moment,
    moment_matrix,
    slope_fit,
)
from .solver import (
    Ball,
    Box,
    Constant,
    Fixed,
    Harmonic,
    NoProjection,
    SolverConfig,
    Stepsize,
    Trace,
    average_point,
    delta_at,
    project,
    resolve_stepsize,
    run,
)

__version__ = "0.1.0"
