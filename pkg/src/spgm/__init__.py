"""Minibatch stochastic proximal gradient toolkit.

Layers: problem oracles and minibatching (problem), the batch prox and its
box-constrained dual solvers (prox), stepsize policies and the outer loops
(stepsize, core), the SVM and sparse-representation applications (svm,
sparse_rep), and the benchmark harness (reference, bench, cli).
"""

from .problem import (
    BoxIndicator,
    CompositeProblem,
    CustomComponent,
    GeneralConjugate,
    LinearComposition,
    Minibatch,
    ZeroComponent,
    absolute_composition,
    empirical_objective,
    empirical_smooth_gradient,
    full_batch,
    hinge_composition,
    minibatch_gradient,
    minibatch_subgradient,
    power_iteration_lmax,
    sample_minibatch,
)
from .prox import (
    BoxQuadDual,
    InnerSolverFailure,
    ProxResult,
    UnsupportedStructureError,
    build_dual,
    prox,
    soft_threshold,
    solve_dual_fast_gradient,
    solve_dual_prox_gradient,
)
from .stepsize import StepsizePolicy, ToleranceSchedule, mixed_switch_point
from .core import SolverState, StepFailure, StopRule, TrajectoryPoint, run, sgdm_step, spgm_step
from .reference import compute_reference, content_hash
from .bench import (
    Diagnostics,
    ExperimentConfig,
    RunRecord,
    average_records,
    estimate_diagnostics,
    quadratic_l1_instance,
    read_records,
    run_experiment,
    write_records,
)

__all__ = [name for name in dir() if not name.startswith("_")]
