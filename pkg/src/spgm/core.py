"""SPG-M outer loop and the minibatch SGD baseline.

One solver step draws an i.i.d. batch, takes the averaged gradient step
v = w - mu_k * mean(grad f), and either solves the batch prox at v to
accuracy delta_k (SPG-M) or subtracts the averaged subgradient of h (SGD-M).
Runs are bitwise reproducible given the seed; nothing here keeps hidden
random state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .problem import (
    Array,
    CompositeProblem,
    minibatch_gradient,
    minibatch_subgradient,
    sample_minibatch,
)
from .prox import InnerSolverFailure, ProxResult, prox
from .stepsize import StepsizePolicy, ToleranceSchedule


@dataclass
class SolverState:
    """Iterate plus consumption counters; steps return a new state."""

    w: Array
    k: int = 0
    outer_samples: int = 0
    inner_samples: int = 0
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    last_prox: ProxResult | None = None


class StepFailure(RuntimeError):
    """Inner solver gave up; carries the state built from its best iterate."""

    def __init__(self, message: str, state: SolverState):
        super().__init__(message)
        self.state = state


def spgm_step(p: CompositeProblem, state: SolverState, policy: StepsizePolicy,
              tol: ToleranceSchedule, batch_size: int,
              solver: str = "auto") -> SolverState:
    """One SPG-M step: averaged gradient step, then the batch prox at v."""
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    mu = policy.step(state.k)
    delta = tol.delta(mu, batch_size)
    batch = sample_minibatch(state.rng, p.sample_count, batch_size)
    v = state.w - mu * minibatch_gradient(p, state.w, batch)
    warm = None
    if state.last_prox is not None and state.last_prox.dual is not None:
        warm = state.last_prox.dual
    try:
        result = prox(p.nonsmooth, v, batch, mu, delta, solver=solver,
                      warm_start=warm)
        failed = None
    except InnerSolverFailure as exc:
        result, failed = exc.result, exc
    next_state = SolverState(
        w=result.primal,
        k=state.k + 1,
        outer_samples=state.outer_samples + batch_size,
        inner_samples=state.inner_samples + result.samples_touched,
        rng=state.rng,
        last_prox=result,
    )
    if failed is not None:
        raise StepFailure(str(failed), next_state)
    return next_state


def sgdm_step(p: CompositeProblem, state: SolverState, policy: StepsizePolicy,
              batch_size: int) -> SolverState:
    """One minibatch SGD step on the full composite (gradient + subgradient)."""
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    mu = policy.step(state.k)
    batch = sample_minibatch(state.rng, p.sample_count, batch_size)
    direction = (minibatch_gradient(p, state.w, batch)
                 + minibatch_subgradient(p, state.w, batch))
    return SolverState(
        w=state.w - mu * direction,
        k=state.k + 1,
        outer_samples=state.outer_samples + batch_size,
        inner_samples=state.inner_samples,
        rng=state.rng,
        last_prox=None,
    )


@dataclass(frozen=True)
class StopRule:
    """Stop on any of: iteration count, distance to a reference, sample budget."""

    max_iterations: int | None = None
    target_distance: float | None = None
    reference: Array | None = None
    sample_budget: int | None = None

    def __post_init__(self):
        if (self.max_iterations is None and self.target_distance is None
                and self.sample_budget is None):
            raise ValueError("stop rule is empty")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if self.target_distance is not None:
            if self.target_distance <= 0:
                raise ValueError("target distance must be positive")
            if self.reference is None:
                raise ValueError("distance stop needs a reference point")
        if self.sample_budget is not None and self.sample_budget <= 0:
            raise ValueError("sample budget must be positive")

    def satisfied(self, state: SolverState) -> bool:
        if self.max_iterations is not None and state.k >= self.max_iterations:
            return True
        if self.target_distance is not None:
            if np.linalg.norm(state.w - self.reference) <= self.target_distance:
                return True
        if self.sample_budget is not None:
            if state.outer_samples + state.inner_samples >= self.sample_budget:
                return True
        return False


@dataclass
class TrajectoryPoint:
    """Per-iteration record kept by run(); w is the iterate itself."""

    k: int
    w: Array
    mu: float
    delta: float
    outer_samples: int
    inner_samples: int
    inner_iterations: int
    certificate: float
    time_s: float
    flag: str = ""


def run(p: CompositeProblem, w0: Array, policy: StepsizePolicy,
        tol: ToleranceSchedule, batch_size: int, stop: StopRule,
        method: str = "spgm", seed: int = 0, solver: str = "auto",
        stride: int = 1, on_inner_failure: str = "abort") -> list[TrajectoryPoint]:
    """Run a method from w0 until the stop rule fires; returns the trajectory.

    stride thins the recorded trajectory (first and last points always kept).
    on_inner_failure: "abort" re-raises StepFailure, "continue" accepts the
    inner solver's best iterate and flags the record.
    """
    if method not in ("spgm", "sgdm"):
        raise ValueError(f"unknown method {method!r}")
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if on_inner_failure not in ("abort", "continue"):
        raise ValueError("on_inner_failure must be 'abort' or 'continue'")

    state = SolverState(w=np.asarray(w0, dtype=float).copy(),
                        rng=np.random.default_rng(seed))
    started = time.perf_counter()
    trajectory = [TrajectoryPoint(
        k=0, w=state.w.copy(), mu=float("nan"), delta=float("nan"),
        outer_samples=0, inner_samples=0, inner_iterations=0,
        certificate=0.0, time_s=0.0)]

    while not stop.satisfied(state):
        mu = policy.step(state.k)
        delta = tol.delta(mu, batch_size) if method == "spgm" else float("nan")
        flag = ""
        if method == "spgm":
            try:
                state = spgm_step(p, state, policy, tol, batch_size, solver=solver)
            except StepFailure as exc:
                if on_inner_failure == "abort":
                    raise
                state = exc.state
                flag = "inner_failure"
        else:
            state = sgdm_step(p, state, policy, batch_size)

        last = state.last_prox
        point = TrajectoryPoint(
            k=state.k, w=state.w.copy(), mu=mu, delta=delta,
            outer_samples=state.outer_samples,
            inner_samples=state.inner_samples,
            inner_iterations=last.inner_iterations if last is not None else 0,
            certificate=last.certified_accuracy if last is not None else 0.0,
            time_s=time.perf_counter() - started,
            flag=flag,
        )
        if state.k % stride == 0:
            trajectory.append(point)
        else:
            # keep the final point even off-stride
            if stop.satisfied(state):
                trajectory.append(point)
    return trajectory
