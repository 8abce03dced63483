"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
report. Experiment grids are shared through module-scoped fixtures; all runs
are fully seeded, so the measured numbers are reproducible.
"""

import math
import time

import numpy as np
import pytest

import spgm
from spgm.bench import ExperimentConfig, quadratic_l1_instance, run_experiment
from spgm.core import SolverState, sgdm_step, spgm_step
from spgm.prox import build_dual, prox, solve_dual_fast_gradient, solve_dual_prox_gradient
from spgm.stepsize import StepsizePolicy, ToleranceSchedule, mixed_switch_point

from oracles import enumerate_box_qp, soft_threshold_oracle


def report(number, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    print(f"\nACCEPTANCE {number}: {status}  {detail}")
    return passed


# ---------------------------------------------------------------------------
# shared experiment grids
# ---------------------------------------------------------------------------

SPARSE_SEEDS = [101, 102, 103, 104, 105]


def _sparse_config(alpha, mu0, policy, methods, out, cache):
    return ExperimentConfig(
        application="sparse", methods=methods,
        batch_sizes=[1, 10, 50, 100], policy=policy, mu0=mu0,
        seeds=SPARSE_SEEDS, eps=1e-3, max_iter=50_000,
        tolerance="capped", tolerance_cap=3e-6, out=str(out),
        start_offset=1.0, stride=10,
        m=400, n=200, p=400, lam=5e-4, alpha=alpha, sparsity=4,
        amplitude=0.07, instance_seed=7, cache_dir=str(cache))


@pytest.fixture(scope="module")
def sparse_grids(tmp_path_factory):
    """Criterion 7/8 grids: (alpha, policy) -> ExperimentResult, plus wall
    times per grid. alpha=0.7 carries SGD-M for the method comparison."""
    root = tmp_path_factory.mktemp("sparse_grids")
    cache = tmp_path_factory.mktemp("cache")
    grids, timings = {}, {}
    for alpha, mu0 in ((0.7, 1.5), (0.2, 5.25)):
        for policy in ("variable", "mixed"):
            methods = ["spgm", "sgdm"] if (alpha, policy) == (0.7, "variable") else ["spgm"]
            started = time.perf_counter()
            cfg = _sparse_config(alpha, mu0, policy, methods,
                                 root / f"a{alpha}_{policy}", cache)
            grids[(alpha, policy)] = run_experiment(cfg)
            timings[(alpha, policy)] = time.perf_counter() - started
    return grids, timings


def iterations_to_eps(result, method, batch_size):
    per_seed = result.records[(method, batch_size)]
    return {seed: recs[-1].k for seed, recs in per_seed.items()}


@pytest.fixture(scope="module")
def svm_runs(tmp_path_factory):
    """Criterion 9 runs: SPG-M (mixed) and minibatch SGD on the synthetic
    separable corpus, N in {32, 128}, five seeds each."""
    root = tmp_path_factory.mktemp("svm_runs")
    cache = tmp_path_factory.mktemp("svm_cache")
    base = dict(application="svm", policy="mixed", mu0=1.0, switch=30,
                seeds=[1, 2, 3, 4, 5], eps=None, tolerance="capped",
                tolerance_cap=1e-4, corpus="synthetic", corpus_samples=2000,
                vocab=50, svm_lambda=0.02, corpus_seed=11,
                cache_dir=str(cache))
    spgm_res = run_experiment(ExperimentConfig(
        methods=["spgm"], batch_sizes=[32, 128], max_iter=300, stride=1,
        out=str(root / "spgm"), **base))
    sgdm_res = run_experiment(ExperimentConfig(
        methods=["sgdm"], batch_sizes=[32, 128], max_iter=2500, stride=5,
        out=str(root / "sgdm"), **base))
    return spgm_res, sgdm_res


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_1_prox_oracle_equivalence():
    """Both dual solvers match active-set enumeration on 200 random
    instances (n <= 10, N <= 5, mixed hinge/l1) within 1e-6, under 10 s."""
    rng = np.random.default_rng(2024)
    started = time.perf_counter()
    worst = 0.0
    for trial in range(200):
        n = int(rng.integers(2, 11))
        batch_size = int(rng.integers(1, 6))
        vectors = rng.standard_normal((10, n))
        comp = (spgm.hinge_composition(vectors) if trial % 2
                else spgm.absolute_composition(vectors))
        anchor = rng.standard_normal(n)
        batch = spgm.Minibatch(indices=rng.integers(0, 10, size=batch_size))
        mu = float(rng.uniform(0.05, 1.0))
        dual = build_dual(comp, anchor, batch, mu)
        v_star = enumerate_box_qp(dual.dense_matrix(), dual.linear,
                                  dual.lower, dual.upper)
        z_star = dual.recover(v_star)
        for solve in (solve_dual_fast_gradient, solve_dual_prox_gradient):
            res = solve(dual, 1e-7)
            worst = max(worst, float(np.linalg.norm(res.primal - z_star)))
    elapsed = time.perf_counter() - started
    passed = worst <= 1e-6 and elapsed < 10.0
    report(1, passed, f"worst error {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-6
    assert elapsed < 10.0


def test_criterion_2_closed_forms():
    """Single-sample l1 prox equals the soft threshold and the indicator
    prox equals the box projection, exact to 1e-10 on 1000 random points."""
    rng = np.random.default_rng(7)
    n = 6
    lam = 0.35
    l1 = spgm.GeneralConjugate(radius=np.full(n, lam))
    row_l1 = spgm.absolute_composition(lam * np.eye(n))
    box = spgm.BoxIndicator(lower=-np.ones(n), upper=0.5 * np.ones(n))
    batch1 = spgm.Minibatch(indices=np.array([0]))
    worst = 0.0
    for _ in range(1000):
        w = 3.0 * rng.standard_normal(n)
        mu = float(rng.uniform(0.05, 2.0))
        soft = prox(l1, w, batch1, mu, 1e-9).primal
        worst = max(worst, float(np.max(np.abs(
            soft - soft_threshold_oracle(w, mu * lam)))))
        j = int(rng.integers(n))
        single = prox(row_l1, w, spgm.Minibatch(indices=np.array([j])),
                      mu, 1e-9).primal
        expected = w.copy()
        expected[j] = soft_threshold_oracle(w[j], mu * lam)
        worst = max(worst, float(np.max(np.abs(single - expected))))
        projected = prox(box, w, batch1, mu, 1e-9).primal
        worst = max(worst, float(np.max(np.abs(
            projected - np.clip(w, -1.0, 0.5)))))
    passed = worst <= 1e-10
    report(2, passed, f"worst closed-form error {worst:.2e}")
    assert worst <= 1e-10


def test_criterion_3_reduction_identities():
    """spgm_step with h = 0 equals sgdm_step to 1e-12; with f = 0 it equals
    the minibatch proximal point; N in {1, 4, 32}."""
    rng = np.random.default_rng(3)
    centers = rng.standard_normal((40, 5))

    def value(w, xi):
        d = w - centers[xi]
        return 0.5 * float(d @ d)

    def grad(w, xi):
        return w - centers[xi]

    smooth_only = spgm.CompositeProblem(
        dimension=5, sample_count=40, smooth_value=value, smooth_grad=grad,
        nonsmooth=spgm.ZeroComponent(), lipschitz_L=1.0, strong_convexity=1.0)
    comp = spgm.GeneralConjugate(radius=np.full(5, 0.4))
    prox_only = spgm.CompositeProblem(
        dimension=5, sample_count=40,
        smooth_value=lambda w, xi: 0.0,
        smooth_grad=lambda w, xi: np.zeros_like(w),
        nonsmooth=comp, lipschitz_L=1.0)

    policy = StepsizePolicy.constant(0.5, 4, 1.0)
    tol = ToleranceSchedule(mode="exact")
    worst = 0.0
    for batch_size in (1, 4, 32):
        w0 = rng.standard_normal(5)
        a = spgm_step(smooth_only,
                      SolverState(w=w0.copy(), rng=np.random.default_rng(11)),
                      policy, tol, batch_size)
        b = sgdm_step(smooth_only,
                      SolverState(w=w0.copy(), rng=np.random.default_rng(11)),
                      policy, batch_size)
        worst = max(worst, float(np.max(np.abs(a.w - b.w))))

        state = spgm_step(prox_only,
                          SolverState(w=w0.copy(), rng=np.random.default_rng(13)),
                          policy, tol, batch_size)
        replay = np.random.default_rng(13)
        batch = spgm.sample_minibatch(replay, 40, batch_size)
        direct = prox(comp, w0, batch, policy.step(0), 1e-12).primal
        worst = max(worst, float(np.max(np.abs(state.w - direct))))
    passed = worst <= 1e-12
    report(3, passed, f"worst reduction gap {worst:.2e}")
    assert worst <= 1e-12


def test_criterion_4_recurrence():
    """Theorem-1 recurrence holds for >= 95% of iterations of the
    seed-averaged sequence (1000 seeds, n=20, m=50, exact prox), under 60 s."""
    started = time.perf_counter()
    inst = quadratic_l1_instance(2024, n=20, m=50, lam=0.1)
    mu, batch_size, iters, seeds = 0.25, 5, 60, 1000
    policy = StepsizePolicy.constant(12.5, 100, 1.0)   # constant mu = 0.25
    tol = ToleranceSchedule(mode="exact")
    acc = np.zeros(iters + 1)
    for seed in range(seeds):
        state = SolverState(w=2.0 * np.ones(20), rng=np.random.default_rng(seed))
        acc[0] += float(np.sum((state.w - inst.w_star) ** 2))
        for _ in range(iters):
            state = spgm_step(inst.problem, state, policy, tol, batch_size)
            acc[state.k] += float(np.sum((state.w - inst.w_star) ** 2))
    mean_sq = acc / seeds
    sigma = inst.problem.strong_convexity
    delta = tol.delta(mu, batch_size)
    rhs = ((1.0 - 0.5 * sigma * mu) * mean_sq[:-1]
           + mu * mu * inst.sigma_sq / batch_size
           + (3.0 + 2.0 / (sigma * mu)) * delta ** 2)
    satisfied = np.count_nonzero(mean_sq[1:] <= rhs)
    elapsed = time.perf_counter() - started
    fraction = satisfied / iters
    passed = fraction >= 0.95 and elapsed < 60.0
    report(4, passed, f"{satisfied}/{iters} iterations, {elapsed:.1f}s")
    assert fraction >= 0.95
    assert elapsed < 60.0


def test_criterion_5_constant_stepsize_plateau():
    """Constant-stepsize plateau scales like 1/N:
    plateau(N=16)/plateau(N=1) in [1/32, 1/4] over >= 200 seeds."""
    inst = quadratic_l1_instance(2024, n=20, m=50, lam=0.1)
    policy = StepsizePolicy.constant(12.5, 100, 1.0)
    tol = ToleranceSchedule(mode="exact")
    seeds, total_iters, burn_in = 250, 300, 100
    plateau = {}
    for batch_size in (1, 16):
        tail, count = 0.0, 0
        for seed in range(seeds):
            state = SolverState(w=inst.w_star.copy(),
                                rng=np.random.default_rng(10_000 + seed))
            for k in range(total_iters):
                state = spgm_step(inst.problem, state, policy, tol, batch_size)
                if k >= burn_in:
                    tail += float(np.sum((state.w - inst.w_star) ** 2))
                    count += 1
        plateau[batch_size] = tail / count
    ratio = plateau[16] / plateau[1]
    passed = 1.0 / 32.0 <= ratio <= 0.25
    report(5, passed, f"plateau ratio {ratio:.4f}")
    assert 1.0 / 32.0 <= ratio <= 0.25


def test_criterion_6_variable_stepsize_rate():
    """Variable stepsize decays like 1/k: seed-averaged error ratio at
    k=400 vs k=200 in [0.35, 0.75], and error(N=10) < error(N=1) at k=400."""
    inst = quadratic_l1_instance(2024, n=20, m=50, lam=0.1)
    policy = StepsizePolicy.variable(1.5, 1.0)
    tol = ToleranceSchedule(mode="exact")
    seeds = 250
    err_200, err_400 = {}, {}
    for batch_size in (1, 10):
        e200 = e400 = 0.0
        for seed in range(seeds):
            state = SolverState(w=inst.w_star.copy(),
                                rng=np.random.default_rng(20_000 + seed))
            for _ in range(400):
                state = spgm_step(inst.problem, state, policy, tol, batch_size)
                if state.k == 200:
                    e200 += float(np.sum((state.w - inst.w_star) ** 2))
            e400 += float(np.sum((state.w - inst.w_star) ** 2))
        err_200[batch_size] = e200 / seeds
        err_400[batch_size] = e400 / seeds
    ratio = err_400[1] / err_200[1]
    passed = 0.35 <= ratio <= 0.75 and err_400[10] < err_400[1]
    report(6, passed, f"ratio {ratio:.3f}, e(N=10)={err_400[10]:.4f} "
                      f"vs e(N=1)={err_400[1]:.4f}")
    assert 0.35 <= ratio <= 0.75
    assert err_400[10] < err_400[1]


def test_criterion_7_sparse_grid(sparse_grids):
    """Desk-scale sparse representation grid (m=400, n=200, lam=5e-4,
    eps=1e-3, alpha in {0.2, 0.7}, N in {1, 10, 50, 100}): iterations-to-eps
    decrease from N=1 to N=100 under both policies (strict at the endpoints,
    nonincreasing within 15% across the grid), mixed beats variable at
    alpha=0.7, each grid under 5 minutes."""
    grids, timings = sparse_grids
    batch_grid = [1, 10, 50, 100]
    details = []
    ok = True
    means = {}
    for (alpha, policy), result in grids.items():
        m = [float(np.mean(list(iterations_to_eps(result, "spgm", n).values())))
             for n in batch_grid]
        means[(alpha, policy)] = m
        endpoint = m[0] > m[-1]
        weak_monotone = all(m[i + 1] <= 1.15 * m[i] for i in range(3))
        converged = all(
            recs[-1].k < 50_000
            for n in batch_grid
            for recs in result.records[("spgm", n)].values())
        ok &= endpoint and weak_monotone and converged
        details.append(f"a={alpha}/{policy}: " + ">".join(f"{x:.0f}" for x in m))
    mixed_07 = means[(0.7, "mixed")]
    var_07 = means[(0.7, "variable")]
    mixed_wins = all(mx < vr for mx, vr in zip(mixed_07, var_07))
    ok &= mixed_wins and sum(mixed_07) < sum(var_07)
    timing_ok = all(t < 300.0 for t in timings.values())
    ok &= timing_ok
    report(7, ok, "; ".join(details)
           + f"; mixed<variable at a=0.7: {mixed_wins}"
           + f"; max grid time {max(timings.values()):.0f}s")
    for (alpha, policy), m in means.items():
        assert m[0] > m[-1], (alpha, policy, m)
        assert all(m[i + 1] <= 1.15 * m[i] for i in range(3)), (alpha, policy, m)
    assert mixed_wins and sum(mixed_07) < sum(var_07)
    assert timing_ok


def test_criterion_8_spgm_vs_sgd(sparse_grids):
    """At alpha=0.7 SGD-M needs more iterations than SPG-M at N=1, and the
    SGD-M minibatch runs (N in {10, 50, 100}) reach eps within 20% of each
    other; both orderings hold on >= 4 of 5 seeds."""
    grids, _ = sparse_grids
    result = grids[(0.7, "variable")]
    spgm_n1 = iterations_to_eps(result, "spgm", 1)
    sgdm_n1 = iterations_to_eps(result, "sgdm", 1)
    ordering_wins = sum(sgdm_n1[s] > spgm_n1[s] for s in SPARSE_SEEDS)

    cluster_wins = 0
    for seed in SPARSE_SEEDS:
        crossings = [iterations_to_eps(result, "sgdm", n)[seed]
                     for n in (10, 50, 100)]
        spread = (max(crossings) - min(crossings)) / max(crossings)
        if spread <= 0.20:
            cluster_wins += 1
    passed = ordering_wins >= 4 and cluster_wins >= 4
    report(8, passed,
           f"ordering {ordering_wins}/5 seeds, clustering {cluster_wins}/5 "
           f"(sgdm N=1 {sorted(sgdm_n1.values())} vs spgm N=1 "
           f"{sorted(spgm_n1.values())})")
    assert ordering_wins >= 4
    assert cluster_wins >= 4


def test_criterion_9_svm_pipeline(svm_runs):
    """SVM end-to-end on the synthetic separable corpus: SPG-M (mixed)
    reaches test accuracy within 1% of the reference accuracy using fewer
    outer sample evaluations than minibatch SGD at N in {32, 128}, on
    >= 4 of 5 seeds."""
    spgm_res, sgdm_res = svm_runs
    from spgm.svm import svm_metrics
    # both runs share the dataset; recompute the reference accuracy via the
    # recorded reference point
    from spgm.bench import _build_application
    problem, _, metric_fn, _ = _build_application(spgm_res.config)
    ref_accuracy = metric_fn(spgm_res.reference, spgm_res.reference)["accuracy"]
    target = ref_accuracy - 0.01

    def first_crossing(result, method, batch_size, seed):
        for rec in result.records[(method, batch_size)][seed]:
            if rec.accuracy is not None and rec.accuracy >= target:
                return rec.outer_samples
        return math.inf

    details = [f"ref accuracy {ref_accuracy:.3f}"]
    ok = True
    for batch_size in (32, 128):
        wins = 0
        spgm_cross, sgdm_cross = [], []
        for seed in (1, 2, 3, 4, 5):
            a = first_crossing(spgm_res, "spgm", batch_size, seed)
            b = first_crossing(sgdm_res, "sgdm", batch_size, seed)
            spgm_cross.append(a)
            sgdm_cross.append(b)
            if a < b:
                wins += 1
        ok &= wins >= 4
        details.append(f"N={batch_size}: {wins}/5 seeds "
                       f"(spgm {spgm_cross} vs sgdm {sgdm_cross})")
        assert all(np.isfinite(spgm_cross)), "SPG-M never reached the target"
    report(9, ok, "; ".join(details))
    assert ok


def test_criterion_10_mixed_switch_point():
    """mixed_switch_point matches an independent high-precision evaluation
    on 20 random tuples, exact up to one unit at the ceiling boundary."""
    rng = np.random.default_rng(42)
    exact_matches = 0
    for _ in range(20):
        lipschitz = float(rng.uniform(0.5, 20.0))
        sigma = float(rng.uniform(0.05, 2.0))
        mu0 = float(rng.uniform(0.1, 5.0))
        eps = float(10.0 ** rng.uniform(-8, -2))
        r0_sq = float(rng.uniform(0.1, 50.0))
        ours = mixed_switch_point(lipschitz, sigma, mu0, eps, r0_sq)
        hi = np.longdouble(4.0) * np.longdouble(lipschitz) / (
            np.longdouble(mu0) * np.longdouble(sigma)) * np.log(
            np.longdouble(2.0) * np.longdouble(r0_sq) / np.longdouble(eps))
        oracle = int(np.ceil(hi))
        assert abs(ours - oracle) <= 1
        if ours == oracle:
            exact_matches += 1
    passed = exact_matches >= 18
    report(10, passed, f"{exact_matches}/20 exactly equal, rest within 1 ulp")
    assert passed
