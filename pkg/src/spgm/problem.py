"""Composite stochastic problems: sample oracles, nonsmooth structure, minibatching.

A problem is  min_w  E[f(w; xi)] + E[h(w; xi)]  with xi uniform over a finite
sample space {0, ..., m-1}. The smooth part is given by per-sample value and
gradient oracles; the nonsmooth part is one of the structured components below,
which also carry the conjugate data the dual prox solvers need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

Array = np.ndarray


# ---------------------------------------------------------------------------
# nonsmooth components
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearComposition:
    """h(w; xi) = scalar(vectors[xi] @ w) for a scalar convex `scalar`.

    The scalar conjugate must be affine on a bounded interval (its effective
    domain): conjugate(u) = conjugate_slope * u on conjugate_interval. Hinge
    and absolute value fit this mold; that is what makes the minibatch prox a
    box-constrained concave quadratic in N dual variables.
    """

    vectors: Array                     # (m, n), row xi is a_xi
    scalar: Callable[[Array], Array]   # vectorized l(t)
    scalar_slope: Callable[[float], float]
    conjugate_interval: tuple[float, float]
    conjugate_slope: float = 0.0
    kind: str = "linear_composition"

    def value(self, w: Array, xi: int) -> float:
        return float(self.scalar(float(self.vectors[xi] @ w)))

    def subgradient(self, w: Array, xi: int) -> Array:
        return self.scalar_slope(float(self.vectors[xi] @ w)) * self.vectors[xi]


def hinge_composition(vectors: Array) -> LinearComposition:
    """max(0, 1 + a_xi @ w); conjugate is -u on [0, 1].

    For an SVM pass vectors = -y_xi * x_xi so the value is the hinge loss
    max(0, 1 - y_xi x_xi @ w).
    """
    return LinearComposition(
        vectors=np.asarray(vectors, dtype=float),
        scalar=lambda t: np.maximum(0.0, 1.0 + t),
        scalar_slope=lambda t: 1.0 if t > -1.0 else 0.0,
        conjugate_interval=(0.0, 1.0),
        conjugate_slope=-1.0,
        kind="hinge",
    )


def absolute_composition(vectors: Array) -> LinearComposition:
    """|a_xi @ w|; conjugate is 0 on [-1, 1].

    Scale weights into the vectors: lam * |d_xi @ w| == |(lam * d_xi) @ w|.
    """
    return LinearComposition(
        vectors=np.asarray(vectors, dtype=float),
        scalar=np.abs,
        scalar_slope=lambda t: float(np.sign(t)),   # 0 at the kink
        conjugate_interval=(-1.0, 1.0),
        conjugate_slope=0.0,
        kind="absolute",
    )


@dataclass(frozen=True)
class GeneralConjugate:
    """Separable nonsmooth part whose conjugate lives on a coordinate box.

    h(w; xi) = sum_j radius[j] * |w[j] - shifts[xi][j]|, so the per-sample
    conjugate is h*(v; xi) = shifts[xi] @ v on the box [-radius, radius]^n.
    With shifts None this is the weighted l1 norm (identical for every
    sample); radius plays the role of the dual-domain radius R_d.
    """

    radius: Array                 # (n,) nonnegative
    shifts: Array | None = None   # (m, n) or None for zero

    def shift(self, xi: int) -> Array:
        if self.shifts is None:
            return np.zeros_like(self.radius)
        return self.shifts[xi]

    def value(self, w: Array, xi: int) -> float:
        return float(self.radius @ np.abs(w - self.shift(xi)))

    def subgradient(self, w: Array, xi: int) -> Array:
        return self.radius * np.sign(w - self.shift(xi))


@dataclass(frozen=True)
class BoxIndicator:
    """h(w; xi) = indicator of the box [lower, upper], the same for all xi.

    The minibatch prox of an indicator is the projection onto the box.
    """

    lower: Array
    upper: Array

    def project(self, w: Array) -> Array:
        return np.clip(w, self.lower, self.upper)

    def value(self, w: Array, xi: int) -> float:
        inside = np.all(w >= self.lower - 1e-12) and np.all(w <= self.upper + 1e-12)
        return 0.0 if inside else float("inf")

    def subgradient(self, w: Array, xi: int) -> Array:
        return np.zeros_like(np.asarray(w, dtype=float))


@dataclass(frozen=True)
class ZeroComponent:
    """h identically zero; the prox is the identity."""

    def value(self, w: Array, xi: int) -> float:
        return 0.0

    def subgradient(self, w: Array, xi: int) -> Array:
        return np.zeros_like(np.asarray(w, dtype=float))


@dataclass(frozen=True)
class CustomComponent:
    """Black-box oracles with no dual structure; usable by subgradient methods
    only. The dual prox solvers reject it."""

    value_fn: Callable[[Array, int], float]
    subgradient_fn: Callable[[Array, int], Array]

    def value(self, w: Array, xi: int) -> float:
        return self.value_fn(w, xi)

    def subgradient(self, w: Array, xi: int) -> Array:
        return self.subgradient_fn(w, xi)


# ---------------------------------------------------------------------------
# problem and minibatches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompositeProblem:
    """Finite-sample composite problem with per-sample oracles.

    lipschitz_L bounds the gradient Lipschitz constant used for stepsize caps
    (applications supply it analytically or by power iteration on the
    empirical Hessian); strong_convexity is the modulus of the expectation of
    the smooth part. Oracles must be pure functions of (w, xi).
    """

    dimension: int
    sample_count: int
    smooth_value: Callable[[Array, int], float]
    smooth_grad: Callable[[Array, int], Array]
    nonsmooth: object
    lipschitz_L: float
    strong_convexity: float = 0.0

    def __post_init__(self):
        if self.dimension < 1 or self.sample_count < 1:
            raise ValueError("dimension and sample_count must be positive")
        if self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive")
        if self.strong_convexity < 0:
            raise ValueError("strong_convexity must be nonnegative")


@dataclass(frozen=True)
class Minibatch:
    """A tuple of sample indices drawn i.i.d. with replacement."""

    indices: Array

    def __post_init__(self):
        idx = np.asarray(self.indices)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("a minibatch needs at least one index")
        if np.any(idx < 0):
            raise ValueError("negative sample index")

    @property
    def size(self) -> int:
        return int(np.asarray(self.indices).size)


def sample_minibatch(rng: np.random.Generator, m: int, batch_size: int) -> Minibatch:
    """Draw batch_size indices i.i.d. uniformly (with replacement) from [0, m)."""
    if m < 1:
        raise ValueError("sample space must be nonempty")
    if batch_size < 1:
        raise ValueError("batch size must be at least 1")
    return Minibatch(indices=rng.integers(0, m, size=batch_size))


def full_batch(m: int) -> Minibatch:
    """Every sample exactly once; used by the deterministic reference solver."""
    if m < 1:
        raise ValueError("sample space must be nonempty")
    return Minibatch(indices=np.arange(m))


def _check_dim(p: CompositeProblem, w: Array) -> Array:
    w = np.asarray(w, dtype=float)
    if w.shape != (p.dimension,):
        raise ValueError(f"expected shape ({p.dimension},), got {w.shape}")
    return w


def minibatch_gradient(p: CompositeProblem, w: Array, batch: Minibatch) -> Array:
    """Average of the per-sample smooth gradients over the batch."""
    w = _check_dim(p, w)
    g = np.zeros(p.dimension)
    for i in np.asarray(batch.indices):
        g += p.smooth_grad(w, int(i))
    return g / batch.size


def minibatch_subgradient(p: CompositeProblem, w: Array, batch: Minibatch) -> Array:
    """Average of the chosen nonsmooth subgradients over the batch."""
    w = _check_dim(p, w)
    g = np.zeros(p.dimension)
    for i in np.asarray(batch.indices):
        g += p.nonsmooth.subgradient(w, int(i))
    return g / batch.size


def empirical_objective(p: CompositeProblem, w: Array) -> float:
    """Full-sample objective (1/m) sum_xi [f(w;xi) + h(w;xi)]."""
    w = _check_dim(p, w)
    total = 0.0
    for xi in range(p.sample_count):
        total += p.smooth_value(w, xi) + p.nonsmooth.value(w, xi)
    return total / p.sample_count


def empirical_smooth_gradient(p: CompositeProblem, w: Array) -> Array:
    """Gradient of the empirical mean of the smooth part."""
    return minibatch_gradient(p, w, full_batch(p.sample_count))


def power_iteration_lmax(matvec: Callable[[Array], Array], dim: int,
                         iters: int = 30, tol: float = 1e-9) -> float:
    """Largest eigenvalue of a PSD operator by power iteration.

    Deterministic: the start vector comes from a fixed-seed generator, so
    repeated calls on the same operator agree bitwise.
    """
    rng = np.random.default_rng(0)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        u = matvec(v)
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 0.0
        lam_new = float(v @ u)
        v = u / norm
        # relative stabilization test; an absolute test would stop instantly
        # on small-magnitude spectra
        if lam != 0.0 and abs(lam_new - lam) <= tol * abs(lam_new):
            lam = lam_new
            break
        lam = lam_new
    return max(lam, 0.0)
