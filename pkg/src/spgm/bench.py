"""Benchmark harness: experiment configs, reference solutions, multi-seed
method comparisons, CSV emission, and diagnostics.

One flat CSV schema serves both applications; missing metrics are empty
fields. A key=value manifest per experiment records the config, the instance
hash, and the estimated diagnostics.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, fields as dc_fields
from pathlib import Path

import numpy as np

from .core import StopRule, run
from .problem import CompositeProblem, GeneralConjugate
from .prox import soft_threshold
from .reference import compute_reference, content_hash
from .sparse_rep import generate_instance, load_instance, to_problem
from .stepsize import StepsizePolicy, ToleranceSchedule, mixed_switch_point
from .svm import (
    build_bow_features,
    build_svm_problem,
    load_labeled_corpus,
    load_sparse_dataset,
    make_separable_corpus,
    svm_metrics,
)

CSV_COLUMNS = [
    "run_id", "method", "N", "seed", "k", "time_s", "mu_k", "delta_k",
    "outer_samples", "inner_samples", "dist_sq", "objective", "accuracy",
    "loss", "inner_iters", "certificate", "flag",
]

_STR_FIELDS = {"run_id", "method", "flag"}
_INT_FIELDS = {"N", "seed", "k", "outer_samples", "inner_samples", "inner_iters"}


@dataclass
class RunRecord:
    run_id: str
    method: str
    N: int
    seed: int | None
    k: int
    time_s: float
    mu_k: float | None
    delta_k: float | None
    outer_samples: int | float
    inner_samples: int | float
    dist_sq: float | None
    objective: float | None
    accuracy: float | None
    loss: float | None
    inner_iters: int | float
    certificate: float | None
    flag: str = ""


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if np.isnan(value):
        return ""
    return repr(value)


def _parse_cell(name: str, cell: str):
    if name in _STR_FIELDS:
        return cell
    if cell == "":
        return None
    if name in _INT_FIELDS:
        try:
            return int(cell)
        except ValueError:
            return float(cell)
    return float(cell)


def write_records(path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for rec in records:
            writer.writerow([_format_cell(getattr(rec, col)) for col in CSV_COLUMNS])


def read_records(path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_COLUMNS:
            raise ValueError(f"{path}: unexpected CSV header")
        out = []
        for row in reader:
            values = {name: _parse_cell(name, cell)
                      for name, cell in zip(CSV_COLUMNS, row)}
            out.append(RunRecord(**values))
    return out


def average_records(per_seed: dict[int, list[RunRecord]],
                    run_id: str) -> list[RunRecord]:
    """Arithmetic mean across seeds, grouped by iteration index.

    Iterations present in only some seeds average over the seeds that have
    them. The seed column is left empty; a flag is propagated if any
    contributing row carried one.
    """
    by_k: dict[int, list[RunRecord]] = {}
    for recs in per_seed.values():
        for rec in recs:
            by_k.setdefault(rec.k, []).append(rec)

    numeric = ["time_s", "mu_k", "delta_k", "outer_samples", "inner_samples",
               "dist_sq", "objective", "accuracy", "loss", "inner_iters",
               "certificate"]
    averaged = []
    for k in sorted(by_k):
        group = by_k[k]
        mean_values = {}
        for name in numeric:
            vals = [getattr(r, name) for r in group
                    if getattr(r, name) is not None
                    and not (isinstance(getattr(r, name), float)
                             and np.isnan(getattr(r, name)))]
            mean_values[name] = sum(vals) / len(vals) if vals else None
        flag = next((r.flag for r in group if r.flag), "")
        averaged.append(RunRecord(
            run_id=run_id, method=group[0].method, N=group[0].N, seed=None,
            k=k, flag=flag, **mean_values))
    return averaged


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostics:
    sigma_hat_sq: float      # E ||grad f(w*;xi) + g_h(w*;xi)||^2
    s_hat: float             # E ||g_h(w*;xi)||^2
    lipschitz: float
    strong_convexity: float


def estimate_diagnostics(p: CompositeProblem, w_star) -> Diagnostics:
    """Empirical means over all samples of the composite and nonsmooth
    subgradient norms at the reference solution."""
    w_star = np.asarray(w_star, dtype=float)
    total_f = 0.0
    total_h = 0.0
    for xi in range(p.sample_count):
        g_h = p.nonsmooth.subgradient(w_star, xi)
        g_total = p.smooth_grad(w_star, xi) + g_h
        total_f += float(g_total @ g_total)
        total_h += float(g_h @ g_h)
    m = p.sample_count
    return Diagnostics(sigma_hat_sq=total_f / m, s_hat=total_h / m,
                       lipschitz=p.lipschitz_L,
                       strong_convexity=p.strong_convexity)


# ---------------------------------------------------------------------------
# synthetic strongly convex instance (recurrence and rate experiments)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticQuadL1:
    """f(w;xi) = ||w - c_xi||^2 / 2 with an l1 penalty shared by all samples.

    Everything is analytic: L_f = sigma_f = 1, w* = soft(mean(c), lam), and
    the mean-zero optimal-subgradient selection gives
    Sigma^2 = mean ||c_xi - mean(c)||^2.
    """

    problem: CompositeProblem
    w_star: np.ndarray
    sigma_sq: float
    centers: np.ndarray
    lam: float


def quadratic_l1_instance(seed: int, n: int = 20, m: int = 50,
                          lam: float = 0.1) -> SyntheticQuadL1:
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((m, n))
    mean_center = centers.mean(axis=0)

    def value(w, xi):
        d = w - centers[xi]
        return 0.5 * float(d @ d)

    def grad(w, xi):
        return w - centers[xi]

    problem = CompositeProblem(
        dimension=n, sample_count=m,
        smooth_value=value, smooth_grad=grad,
        nonsmooth=GeneralConjugate(radius=np.full(n, lam)),
        lipschitz_L=1.0, strong_convexity=1.0,
    )
    w_star = soft_threshold(mean_center, lam)
    sigma_sq = float(np.mean(np.sum((centers - mean_center) ** 2, axis=1)))
    return SyntheticQuadL1(problem=problem, w_star=w_star, sigma_sq=sigma_sq,
                           centers=centers, lam=lam)


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------

_LIST_INT = ("batch_sizes", "seeds")
_LIST_STR = ("methods",)
_FLOATS = ("mu0", "eps", "lam", "alpha", "amplitude", "svm_lambda", "split",
           "start_offset", "ref_tol", "tolerance_cap")
_INTS = ("horizon", "switch", "max_iter", "sample_budget", "stride", "m", "n",
         "p", "sparsity", "instance_seed", "corpus_samples", "vocab",
         "corpus_seed")


@dataclass
class ExperimentConfig:
    application: str = "sparse"            # sparse | svm
    methods: list[str] = field(default_factory=lambda: ["spgm"])
    batch_sizes: list[int] = field(default_factory=lambda: [1])
    policy: str = "variable"               # constant | variable | mixed
    mu0: float = 1.0
    horizon: int | None = None             # K (constant)
    switch: int | None = None              # T1 (mixed); derived when absent
    seeds: list[int] = field(default_factory=lambda: [0])
    eps: float | None = None
    max_iter: int | None = 1000
    sample_budget: int | None = None
    solver: str = "fast_gradient"
    tolerance: str = "theorem"             # theorem | capped | exact
    tolerance_cap: float = 1e-6
    out: str = "results"
    stride: int = 1
    failure_policy: str = "continue"       # continue | abort
    ref_tol: float | None = None
    start_offset: float = 0.0
    cache_dir: str | None = None
    # sparse application
    m: int = 400
    n: int = 200
    p: int | None = None                   # defaults to m (row pairing)
    lam: float = 5e-4
    alpha: float = 0.2
    sparsity: int = 4
    amplitude: float = 1.0
    instance_seed: int = 7
    instance_path: str | None = None
    # svm application
    corpus: str = "synthetic"              # synthetic | file
    corpus_path: str | None = None
    corpus_format: str = "text"            # text | sparse
    corpus_samples: int = 2000
    vocab: int = 50
    svm_lambda: float = 0.02
    split: float = 0.8
    corpus_seed: int = 0

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        known = {f.name for f in dc_fields(cls)}
        cfg = cls()
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected key=value")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in known:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                cfg.set_option(key, value)
        return cfg

    def set_option(self, key: str, value: str) -> None:
        if value == "":
            setattr(self, key, None)
            return
        if key in _LIST_INT:
            setattr(self, key, [int(v) for v in value.split(",") if v.strip()])
        elif key in _LIST_STR:
            setattr(self, key, [v.strip() for v in value.split(",") if v.strip()])
        elif key in _FLOATS:
            setattr(self, key, float(value))
        elif key in _INTS:
            setattr(self, key, int(value))
        else:
            setattr(self, key, value)

    def validate(self) -> None:
        if self.application not in ("sparse", "svm"):
            raise ValueError(f"unknown application {self.application!r}")
        if not self.methods or not self.batch_sizes or not self.seeds:
            raise ValueError("need at least one method, batch size, and seed")
        for method in self.methods:
            if method not in ("spgm", "sgdm"):
                raise ValueError(f"unknown method {method!r}")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("eps must be positive when set")
        if self.eps is None and self.max_iter is None and self.sample_budget is None:
            raise ValueError("need a stop rule: eps, max_iter, or sample_budget")
        if self.failure_policy not in ("continue", "abort"):
            raise ValueError("failure_policy must be 'continue' or 'abort'")


# ---------------------------------------------------------------------------
# experiment runner
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    config: ExperimentConfig
    reference: np.ndarray
    diagnostics: Diagnostics
    instance_hash: str
    csv_paths: list[Path]
    manifest_path: Path
    records: dict[tuple[str, int], dict[int, list[RunRecord]]]


def _build_application(cfg: ExperimentConfig):
    """Returns (problem, instance_hash, metric_fn_factory, manifest_extras)."""
    if cfg.application == "sparse":
        if cfg.instance_path:
            inst = load_instance(cfg.instance_path)
        else:
            inst = generate_instance(
                cfg.instance_seed, cfg.m, cfg.n,
                cfg.p if cfg.p is not None else cfg.m,
                cfg.lam, cfg.alpha, cfg.sparsity, amplitude=cfg.amplitude)
        problem = to_problem(inst)
        key = content_hash(inst.dictionary, inst.observation, inst.scaling,
                           lam=inst.penalty, alpha=inst.ridge)

        def metrics(w, w_ref):
            d = w - w_ref
            from .problem import empirical_objective
            return {"dist_sq": float(d @ d),
                    "objective": empirical_objective(problem, w),
                    "accuracy": None, "loss": None}

        extras = {f"instance_{k}": v for k, v in inst.params.items()}
        return problem, key, metrics, extras

    # svm
    if cfg.corpus == "synthetic":
        corpus = make_separable_corpus(cfg.corpus_samples, cfg.vocab,
                                       np.random.default_rng(cfg.corpus_seed))
        dataset = build_bow_features(corpus, cfg.vocab, split_ratio=cfg.split,
                                     rng=np.random.default_rng(cfg.corpus_seed + 1))
    elif cfg.corpus_format == "sparse":
        dataset = load_sparse_dataset(cfg.corpus_path, split_ratio=cfg.split,
                                      rng=np.random.default_rng(cfg.corpus_seed))
    else:
        corpus = load_labeled_corpus(cfg.corpus_path)
        dataset = build_bow_features(corpus, cfg.vocab, split_ratio=cfg.split,
                                     rng=np.random.default_rng(cfg.corpus_seed))
    problem = build_svm_problem(dataset, cfg.svm_lambda)
    key = content_hash(dataset.features, dataset.labels,
                       dataset.train_indices, lam=cfg.svm_lambda)

    def metrics(w, w_ref):
        stats = svm_metrics(dataset, w, w_ref=w_ref)
        d = w - w_ref
        from .problem import empirical_objective
        return {"dist_sq": float(d @ d),
                "objective": empirical_objective(problem, w),
                "accuracy": stats.accuracy, "loss": stats.hinge_loss}

    extras = {"svm_samples": dataset.features.shape[0],
              "svm_features": dataset.n_features,
              "svm_train": len(dataset.train_indices)}
    return problem, key, metrics, extras


def _make_policy(cfg: ExperimentConfig, problem: CompositeProblem,
                 r0_sq: float) -> StepsizePolicy:
    lip = problem.lipschitz_L
    if cfg.policy == "constant":
        horizon = cfg.horizon if cfg.horizon is not None else 100
        return StepsizePolicy.constant(cfg.mu0, horizon, lip)
    if cfg.policy == "variable":
        return StepsizePolicy.variable(cfg.mu0, lip)
    if cfg.policy == "mixed":
        if cfg.switch is not None:
            switch = cfg.switch
        else:
            eps_sq = (cfg.eps if cfg.eps is not None else 1e-3) ** 2
            switch = mixed_switch_point(lip, problem.strong_convexity,
                                        cfg.mu0, eps_sq, max(r0_sq, eps_sq))
        return StepsizePolicy.mixed(cfg.mu0, switch, lip)
    raise ValueError(f"unknown policy {cfg.policy!r}")


def _start_point(cfg: ExperimentConfig, problem: CompositeProblem,
                 w_star: np.ndarray, seed: int) -> np.ndarray:
    if cfg.start_offset and cfg.start_offset > 0:
        rng = np.random.default_rng([seed, 0xA5])
        direction = rng.standard_normal(problem.dimension)
        direction /= np.linalg.norm(direction)
        return w_star + cfg.start_offset * direction
    return np.zeros(problem.dimension)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the configured (method, N, seed) grid and write CSVs + manifest."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)

    problem, instance_hash, metric_fn, extras = _build_application(cfg)
    ref_tol = cfg.ref_tol
    if ref_tol is None:
        # the hinge duality-gap certificate floors above what 1e-9 needs
        ref_tol = 1e-8 if cfg.application == "svm" else 1e-9
    w_star = compute_reference(problem, tol=ref_tol, cache_key=instance_hash,
                               cache_dir=cfg.cache_dir)
    diagnostics = estimate_diagnostics(problem, w_star)

    tol_schedule = ToleranceSchedule(mode=cfg.tolerance, cap=cfg.tolerance_cap)
    csv_paths: list[Path] = []
    all_records: dict[tuple[str, int], dict[int, list[RunRecord]]] = {}
    r0_by_seed: dict[int, float] = {}

    for method in cfg.methods:
        for batch_size in cfg.batch_sizes:
            per_seed: dict[int, list[RunRecord]] = {}
            for seed in cfg.seeds:
                w0 = _start_point(cfg, problem, w_star, seed)
                r0_sq = float(np.sum((w0 - w_star) ** 2))
                r0_by_seed[seed] = r0_sq
                policy = _make_policy(cfg, problem, r0_sq)
                stop = StopRule(
                    max_iterations=cfg.max_iter,
                    target_distance=cfg.eps,
                    reference=w_star if cfg.eps is not None else None,
                    sample_budget=cfg.sample_budget,
                )
                trajectory = run(problem, w0, policy, tol_schedule, batch_size,
                                 stop, method=method, seed=seed,
                                 solver=cfg.solver, stride=cfg.stride,
                                 on_inner_failure=cfg.failure_policy)
                run_id = f"{cfg.application}-{method}-N{batch_size}-s{seed}"
                records = []
                for point in trajectory:
                    stats = metric_fn(point.w, w_star)
                    records.append(RunRecord(
                        run_id=run_id, method=method, N=batch_size, seed=seed,
                        k=point.k, time_s=point.time_s,
                        mu_k=None if np.isnan(point.mu) else point.mu,
                        delta_k=None if np.isnan(point.delta) else point.delta,
                        outer_samples=point.outer_samples,
                        inner_samples=point.inner_samples,
                        dist_sq=stats["dist_sq"], objective=stats["objective"],
                        accuracy=stats["accuracy"], loss=stats["loss"],
                        inner_iters=point.inner_iterations,
                        certificate=point.certificate, flag=point.flag))
                per_seed[seed] = records

            cell_path = out / f"{cfg.application}_{method}_N{batch_size}.csv"
            write_records(cell_path, [r for s in cfg.seeds for r in per_seed[s]])
            avg_path = out / f"{cfg.application}_{method}_N{batch_size}_avg.csv"
            avg_id = f"{cfg.application}-{method}-N{batch_size}-avg"
            write_records(avg_path, average_records(per_seed, avg_id))
            csv_paths.extend([cell_path, avg_path])
            all_records[(method, batch_size)] = per_seed

    manifest_path = out / "manifest.txt"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(f"instance_hash={instance_hash}\n")
        fh.write(f"ref_tol={ref_tol!r}\n")
        fh.write(f"sigma_hat_sq={diagnostics.sigma_hat_sq!r}\n")
        fh.write(f"s_hat={diagnostics.s_hat!r}\n")
        fh.write(f"lipschitz={diagnostics.lipschitz!r}\n")
        fh.write(f"strong_convexity={diagnostics.strong_convexity!r}\n")
        for seed in cfg.seeds:
            fh.write(f"r0_sq_seed_{seed}={r0_by_seed[seed]!r}\n")
        for key, value in extras.items():
            fh.write(f"{key}={value}\n")
        for f in dc_fields(cfg):
            value = getattr(cfg, f.name)
            if isinstance(value, list):
                value = ",".join(str(v) for v in value)
            fh.write(f"config_{f.name}={value}\n")

    return ExperimentResult(
        config=cfg, reference=w_star, diagnostics=diagnostics,
        instance_hash=instance_hash, csv_paths=csv_paths,
        manifest_path=manifest_path, records=all_records)
