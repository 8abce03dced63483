"""Deterministic full-batch reference solutions with on-disk caching.

Accelerated proximal gradient on the empirical objective, with adaptive
(objective) restarts, a warm-started full-batch inner prox, and a certified
gradient-mapping stopping rule: the reported certificate is the measured
fixed-point residual plus the inner prox certificate divided by the step.
Caching is keyed by a caller-supplied content hash; a cache hit reproduces
the stored iterate bitwise. Reference computation is serialized per key
(runs here are sequential; the cache write is atomic via replace).
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .problem import (
    Array,
    CompositeProblem,
    empirical_objective,
    empirical_smooth_gradient,
    full_batch,
)
from .prox import InnerSolverFailure, prox

CACHE_ENV_VAR = "SPGM_CACHE_DIR"


def content_hash(*arrays, **scalars) -> str:
    """Stable hex key for cache lookups, from raw array bytes and scalars."""
    digest = hashlib.sha256()
    for a in arrays:
        arr = np.ascontiguousarray(a)
        digest.update(str(arr.shape).encode())
        digest.update(str(arr.dtype).encode())
        digest.update(arr.tobytes())
    for key in sorted(scalars):
        digest.update(f"{key}={scalars[key]!r};".encode())
    return digest.hexdigest()[:20]


def _resolve_cache_dir(cache_dir) -> Path | None:
    if cache_dir is not None:
        return Path(cache_dir)
    env = os.environ.get(CACHE_ENV_VAR)
    return Path(env) if env else None


def compute_reference(p: CompositeProblem, tol: float = 1e-9,
                      cache_key: str | None = None,
                      cache_dir=None,
                      max_outer: int = 200_000) -> Array:
    """Minimizer of the empirical objective to gradient-mapping norm <= tol.

    Raises RuntimeError when the iteration cap is exceeded before the
    certificate meets tol (slow convergence without strong convexity is the
    usual cause); the message carries the best certificate reached.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    directory = _resolve_cache_dir(cache_dir)
    cache_file = None
    if cache_key is not None and directory is not None:
        directory.mkdir(parents=True, exist_ok=True)
        cache_file = directory / f"ref_{cache_key}.npy"
        if cache_file.exists():
            return np.load(cache_file)

    mu = 1.0 / p.lipschitz_L
    delta_floor = mu * tol / 3.0
    batch = full_batch(p.sample_count)

    w = np.zeros(p.dimension)
    v = w.copy()
    t_mom = 1.0
    warm = None
    f_prev = float("inf")
    best_cert = float("inf")
    certificate = float("inf")

    converged = False
    since_improvement = 0
    for _ in range(max_outer):
        anchor = v - mu * empirical_smooth_gradient(p, v)
        # only as accurate as the outer residual warrants; tighten near the end
        delta_in = max(delta_floor, min(0.1 * mu * certificate, 1e-3))
        try:
            result = prox(p.nonsmooth, anchor, batch, mu, delta_in,
                          warm_start=warm, max_iterations=50_000)
        except InnerSolverFailure as exc:
            result = exc.result   # best-effort prox; certificate tracked below
        w_next = result.primal
        warm = result.dual

        mapping = float(np.linalg.norm(v - w_next)) / mu
        certificate = mapping + result.certified_accuracy / mu
        if certificate < 0.99 * best_cert:
            since_improvement = 0
        else:
            since_improvement += 1
        best_cert = min(best_cert, certificate)
        if certificate <= tol:
            w = w_next
            converged = True
            break
        if since_improvement >= 300:
            raise RuntimeError(
                f"reference solve stalled: certificate {best_cert:.3e} has not "
                f"improved for 300 iterations (tol {tol:.3e})")

        f_next = empirical_objective(p, w_next)
        if f_next > f_prev:
            # adaptive restart: drop momentum
            t_mom = 1.0
            v = w_next.copy()
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom**2))
            v = w_next + ((t_mom - 1.0) / t_next) * (w_next - w)
            t_mom = t_next
        f_prev = f_next
        w = w_next

    if not converged:
        raise RuntimeError(
            f"reference solve exceeded {max_outer} iterations; best "
            f"certificate {best_cert:.3e} > tol {tol:.3e}")

    if cache_file is not None:
        tmp = cache_file.with_suffix(".tmp.npy")
        np.save(tmp, w)
        os.replace(tmp, cache_file)
        meta = cache_file.with_suffix(".json")
        meta.write_text(json.dumps({"tol": tol, "certificate": best_cert}))
    return w
