"""Parametric sparse representation: recover sparse x from y ~ T x with the
l1 penalty on a scaled subspace Delta x.

Regularized objective (empirical form over the m dictionary rows):

    (1/2m) ||T x - y||^2 + (alpha/2) ||x||^2 + (lam/p) ||Delta x||_1

splitting into f(x; xi) = (1/2)(T_xi x - y_xi)^2 + (alpha/2)||x||^2 and
h(x; xi) = lam |Delta_xi x|. The smooth and nonsmooth parts sample different
row spaces ([m] and [p]); a single batch over [max(m, p)] is mapped into each
by index modulo, which is the identity pairing in the default p == m setup.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .problem import (
    Array,
    CompositeProblem,
    Minibatch,
    absolute_composition,
    power_iteration_lmax,
    sample_minibatch,
)
from .prox import build_dual, solve_dual_fast_gradient, solve_dual_prox_gradient


@dataclass(frozen=True)
class SparseRepInstance:
    dictionary: Array        # T (m, n)
    observation: Array       # y (m,)
    scaling: Array           # Delta (p, n)
    penalty: float           # lam
    ridge: float             # alpha
    ground_truth: Array | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.dictionary.shape[0] != self.observation.shape[0]:
            raise ValueError("row counts of T and y disagree")
        if self.scaling.shape[1] != self.dictionary.shape[1]:
            raise ValueError("Delta and T column counts disagree")
        if self.penalty <= 0 or self.ridge < 0:
            raise ValueError("need lam > 0 and alpha >= 0")

    @property
    def m(self) -> int:
        return self.dictionary.shape[0]

    @property
    def n(self) -> int:
        return self.dictionary.shape[1]

    @property
    def p(self) -> int:
        return self.scaling.shape[0]


def generate_instance(seed: int, m: int, n: int, p: int, lam: float,
                      alpha: float, sparsity: int,
                      amplitude: float = 1.0,
                      noise: float = 1e-3) -> SparseRepInstance:
    """Random instance: unit-norm standard-normal dictionary columns, an
    s-sparse ground truth with normal values scaled by `amplitude`, and
    y = T x0 + noise. Delta is the identity when p == n, otherwise
    standard-normal rows.
    """
    if min(m, n, p) < 1:
        raise ValueError("m, n, p must be positive")
    if not 1 <= sparsity <= n:
        raise ValueError("sparsity must lie in [1, n]")
    rng = np.random.default_rng(seed)
    dictionary = rng.standard_normal((m, n))
    dictionary /= np.linalg.norm(dictionary, axis=0, keepdims=True)
    x0 = np.zeros(n)
    support = rng.choice(n, size=sparsity, replace=False)
    x0[support] = amplitude * rng.standard_normal(sparsity)
    observation = dictionary @ x0 + noise * rng.standard_normal(m)
    scaling = np.eye(n) if p == n else rng.standard_normal((p, n))
    params = dict(seed=seed, m=m, n=n, p=p, lam=lam, alpha=alpha,
                  sparsity=sparsity, amplitude=amplitude, noise=noise)
    return SparseRepInstance(dictionary=dictionary, observation=observation,
                             scaling=scaling, penalty=lam, ridge=alpha,
                             ground_truth=x0, params=params)


def smooth_lipschitz(inst: SparseRepInstance) -> float:
    """lambda_max((1/m) T' T) + alpha via power iteration on the empirical
    Hessian; this is the constant the stepsize cap uses."""
    t_mat = inst.dictionary

    def matvec(x):
        return t_mat.T @ (t_mat @ x) / inst.m

    return power_iteration_lmax(matvec, inst.n) + inst.ridge


def sample_space(inst: SparseRepInstance) -> int:
    return max(inst.m, inst.p)


def to_problem(inst: SparseRepInstance,
               lipschitz: float | None = None) -> CompositeProblem:
    """CompositeProblem over [max(m, p)] with modulo index maps into the
    smooth ([m]) and nonsmooth ([p]) row spaces."""
    t_mat, y = inst.dictionary, inst.observation
    alpha, lam = inst.ridge, inst.penalty
    m, p = inst.m, inst.p
    space = sample_space(inst)

    def value(x, xi):
        r = float(t_mat[xi % m] @ x - y[xi % m])
        return 0.5 * r * r + 0.5 * alpha * float(x @ x)

    def grad(x, xi):
        row = t_mat[xi % m]
        return row * (float(row @ x) - y[xi % m]) + alpha * x

    rows = inst.scaling if p == space else inst.scaling[np.arange(space) % p]
    nonsmooth = absolute_composition(lam * rows)
    return CompositeProblem(
        dimension=inst.n,
        sample_count=space,
        smooth_value=value,
        smooth_grad=grad,
        nonsmooth=nonsmooth,
        lipschitz_L=lipschitz if lipschitz is not None else smooth_lipschitz(inst),
        strong_convexity=alpha,
    )


def regularized_objective(inst: SparseRepInstance, x: Array) -> float:
    """(1/2m)||Tx - y||^2 + (alpha/2)||x||^2 + (lam/p)||Delta x||_1."""
    r = inst.dictionary @ x - inst.observation
    return float(r @ r / (2 * inst.m)
                 + 0.5 * inst.ridge * (x @ x)
                 + inst.penalty / inst.p * np.sum(np.abs(inst.scaling @ x)))


def _mapped_batch(batch: Minibatch, size: int) -> Minibatch:
    return Minibatch(indices=np.asarray(batch.indices) % size)


def spgm_sr_step(inst: SparseRepInstance, x: Array, mu: float, batch_size: int,
                 rng: np.random.Generator, accuracy: float = 1e-9,
                 solver: str = "fast_gradient") -> Array:
    """Specialized SPG-M step for sparse representation.

    Gradient point y^k = [I - (mu/N)(T_I' T_I + N alpha I)] x + (mu/N) T_I' y_I,
    then the box dual z in [-1,1]^N of the batch l1 prox anchored at y^k,
    recovered as x+ = y^k - (mu lam / N) Delta_I' z.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    x = np.asarray(x, dtype=float)
    batch = sample_minibatch(rng, sample_space(inst), batch_size)
    smooth_idx = np.asarray(batch.indices) % inst.m
    t_rows = inst.dictionary[smooth_idx]
    y_rows = inst.observation[smooth_idx]
    n_b = batch.size
    grad_point = (x - (mu / n_b) * (t_rows.T @ (t_rows @ x - y_rows))
                  - mu * inst.ridge * x)

    nonsmooth = absolute_composition(inst.penalty * inst.scaling)
    dual = build_dual(nonsmooth, grad_point, _mapped_batch(batch, inst.p), mu)
    solve = solve_dual_fast_gradient if solver == "fast_gradient" else solve_dual_prox_gradient
    result = solve(dual, accuracy)
    # recover(z) = y^k - (mu lam / N) Delta_I' z since a_i = lam * Delta_i
    return result.primal


def sgdm_sr_step(inst: SparseRepInstance, x: Array, mu: float, batch_size: int,
                 rng: np.random.Generator) -> Array:
    """Minibatch SGD step with sgn(Delta_i x) in {-1, 0, +1} (0 at 0)."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    x = np.asarray(x, dtype=float)
    batch = sample_minibatch(rng, sample_space(inst), batch_size)
    idx = np.asarray(batch.indices)
    t_rows = inst.dictionary[idx % inst.m]
    y_rows = inst.observation[idx % inst.m]
    d_rows = inst.scaling[idx % inst.p]
    n_b = batch.size
    signs = np.sign(d_rows @ x)
    return (x - (mu / n_b) * (t_rows.T @ (t_rows @ x) + n_b * inst.ridge * x)
            + (mu / n_b) * (t_rows.T @ y_rows)
            - (mu * inst.penalty / n_b) * (d_rows.T @ signs))


def save_instance(inst: SparseRepInstance, path) -> None:
    """Self-describing npz container (shape headers, little-endian float64)
    with the generation parameters embedded as JSON for provenance."""
    np.savez(
        path,
        dictionary=inst.dictionary.astype("<f8"),
        observation=inst.observation.astype("<f8"),
        scaling=inst.scaling.astype("<f8"),
        penalty=np.float64(inst.penalty),
        ridge=np.float64(inst.ridge),
        ground_truth=(inst.ground_truth.astype("<f8")
                      if inst.ground_truth is not None else np.zeros(0)),
        params=np.array(json.dumps(inst.params)),
    )


def load_instance(path) -> SparseRepInstance:
    data = np.load(path, allow_pickle=False)
    ground = data["ground_truth"]
    return SparseRepInstance(
        dictionary=data["dictionary"],
        observation=data["observation"],
        scaling=data["scaling"],
        penalty=float(data["penalty"]),
        ridge=float(data["ridge"]),
        ground_truth=ground if ground.size else None,
        params=json.loads(str(data["params"])),
    )
