import numpy as np
import pytest

import spgm
from spgm.problem import CompositeProblem

from oracles import central_difference_gradient, direct_summation_objective


def quadratic_problem(n=3, m=4, seed=0):
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((m, n))

    def value(w, xi):
        d = w - centers[xi]
        return 0.5 * float(d @ d)

    def grad(w, xi):
        return w - centers[xi]

    return CompositeProblem(
        dimension=n, sample_count=m, smooth_value=value, smooth_grad=grad,
        nonsmooth=spgm.ZeroComponent(), lipschitz_L=1.0, strong_convexity=1.0,
    ), centers


class TestSampleMinibatch:
    def test_single_element_space_forces_all_draws(self):
        batch = spgm.sample_minibatch(np.random.default_rng(0), m=1, batch_size=3)
        assert list(batch.indices) == [0, 0, 0]

    def test_paper_scale_batch(self):
        # batches of N=100 from a population of m=400
        batch = spgm.sample_minibatch(np.random.default_rng(0), m=400, batch_size=100)
        assert batch.size == 100
        assert np.all(batch.indices >= 0) and np.all(batch.indices < 400)

    def test_deterministic_under_fixed_seed(self):
        a = spgm.sample_minibatch(np.random.default_rng(123), 10, 4)
        b = spgm.sample_minibatch(np.random.default_rng(123), 10, 4)
        assert np.array_equal(a.indices, b.indices)

    def test_invalid_arguments(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            spgm.sample_minibatch(rng, m=0, batch_size=1)
        with pytest.raises(ValueError):
            spgm.sample_minibatch(rng, m=5, batch_size=0)

    def test_sampling_is_uniform(self):
        # each index frequency within 3 standard deviations of 1/10
        draws = 100_000
        rng = np.random.default_rng(7)
        batch = spgm.sample_minibatch(rng, m=10, batch_size=draws)
        counts = np.bincount(batch.indices, minlength=10)
        p = 0.1
        sd = np.sqrt(draws * p * (1 - p))
        assert np.all(np.abs(counts - draws * p) <= 3 * sd)


class TestMinibatchGradient:
    def test_identical_per_sample_gradients(self):
        # 1-D quadratic f(w;xi) = w^2/2 for every sample
        p = CompositeProblem(
            dimension=1, sample_count=5,
            smooth_value=lambda w, xi: 0.5 * float(w @ w),
            smooth_grad=lambda w, xi: w.copy(),
            nonsmooth=spgm.ZeroComponent(), lipschitz_L=1.0)
        batch = spgm.sample_minibatch(np.random.default_rng(0), 5, 3)
        g = spgm.minibatch_gradient(p, np.array([2.0]), batch)
        assert g == pytest.approx(2.0)

    def test_svm_smooth_part(self):
        lam = 0.1
        p = CompositeProblem(
            dimension=2, sample_count=4,
            smooth_value=lambda w, xi: 0.5 * lam * float(w @ w),
            smooth_grad=lambda w, xi: lam * w,
            nonsmooth=spgm.ZeroComponent(), lipschitz_L=lam)
        batch = spgm.Minibatch(indices=np.array([0, 2, 2]))
        g = spgm.minibatch_gradient(p, np.array([1.0, -2.0]), batch)
        assert np.allclose(g, [0.1, -0.2], atol=1e-15)

    def test_sparse_rep_smooth_against_finite_differences(self):
        # f(x;xi) = (T_xi x - y_xi)^2 / 2 + (alpha/2)||x||^2 on a 3x2 instance
        rng = np.random.default_rng(5)
        t_mat = rng.standard_normal((3, 2))
        y = rng.standard_normal(3)
        alpha = 0.3

        def value(x, xi):
            r = float(t_mat[xi] @ x - y[xi])
            return 0.5 * r * r + 0.5 * alpha * float(x @ x)

        def grad(x, xi):
            return t_mat[xi] * (float(t_mat[xi] @ x) - y[xi]) + alpha * x

        p = CompositeProblem(dimension=2, sample_count=3, smooth_value=value,
                             smooth_grad=grad, nonsmooth=spgm.ZeroComponent(),
                             lipschitz_L=float(np.linalg.norm(t_mat, 2) ** 2) + alpha)
        batch = spgm.Minibatch(indices=np.array([0, 2]))
        x = rng.standard_normal(2)
        g = spgm.minibatch_gradient(p, x, batch)

        def batch_value(z):
            return sum(value(z, int(i)) for i in batch.indices) / batch.size

        fd = central_difference_gradient(batch_value, x, step=1e-6)
        assert np.allclose(g, fd, atol=1e-6)

    def test_dimension_mismatch(self):
        p, _ = quadratic_problem()
        with pytest.raises(ValueError):
            spgm.minibatch_gradient(p, np.zeros(5), spgm.full_batch(4))

    def test_full_batch_equals_empirical_mean_gradient(self):
        p, centers = quadratic_problem(n=6, m=9, seed=3)
        w = np.random.default_rng(1).standard_normal(6)
        g = spgm.minibatch_gradient(p, w, spgm.full_batch(9))
        assert np.allclose(g, w - centers.mean(axis=0), atol=1e-12)


class TestEmpiricalObjective:
    def test_zero_nonsmooth(self):
        p = CompositeProblem(
            dimension=3, sample_count=4,
            smooth_value=lambda w, xi: 0.5 * float(w @ w),
            smooth_grad=lambda w, xi: w.copy(),
            nonsmooth=spgm.ZeroComponent(), lipschitz_L=1.0)
        w = np.array([1.0, 2.0, -1.0])
        assert spgm.empirical_objective(p, w) == pytest.approx(0.5 * 6.0)

    def test_l1_vanishes_at_origin(self):
        p, centers = quadratic_problem(n=3, m=4, seed=2)
        p = CompositeProblem(
            dimension=3, sample_count=4,
            smooth_value=p.smooth_value, smooth_grad=p.smooth_grad,
            nonsmooth=spgm.absolute_composition(np.eye(3)[[0, 1, 2, 0]]),
            lipschitz_L=1.0)
        w0 = np.zeros(3)
        expected = sum(0.5 * float(centers[xi] @ centers[xi]) for xi in range(4)) / 4
        assert spgm.empirical_objective(p, w0) == pytest.approx(expected, abs=1e-14)

    def test_matches_direct_summation(self):
        rng = np.random.default_rng(11)
        p, centers = quadratic_problem(n=4, m=5, seed=11)
        comp = spgm.absolute_composition(rng.standard_normal((5, 4)))
        p = CompositeProblem(dimension=4, sample_count=5,
                             smooth_value=p.smooth_value,
                             smooth_grad=p.smooth_grad,
                             nonsmooth=comp, lipschitz_L=1.0)
        w = rng.standard_normal(4)
        oracle = direct_summation_objective(
            [lambda z, xi=xi: p.smooth_value(z, xi) + comp.value(z, xi)
             for xi in range(5)], w)
        assert spgm.empirical_objective(p, w) == oracle


class TestNonsmoothComponents:
    def test_linear_composition_value_matches_scalar(self):
        rng = np.random.default_rng(0)
        vecs = rng.standard_normal((6, 4))
        hinge = spgm.hinge_composition(vecs)
        absval = spgm.absolute_composition(vecs)
        for _ in range(50):
            w = rng.standard_normal(4)
            xi = int(rng.integers(6))
            t = float(vecs[xi] @ w)
            assert hinge.value(w, xi) == max(0.0, 1.0 + t)
            assert absval.value(w, xi) == abs(t)

    @pytest.mark.parametrize("make", [
        lambda rng: spgm.hinge_composition(rng.standard_normal((5, 3))),
        lambda rng: spgm.absolute_composition(rng.standard_normal((5, 3))),
        lambda rng: spgm.GeneralConjugate(radius=rng.uniform(0.1, 2.0, 3),
                                          shifts=rng.standard_normal((5, 3))),
        lambda rng: spgm.GeneralConjugate(radius=np.full(3, 0.7)),
    ])
    def test_subgradient_inequality(self, make):
        # h(v;xi) >= h(w;xi) + <g, v - w> on 1000 random triples
        rng = np.random.default_rng(99)
        comp = make(rng)
        m = comp.shifts.shape[0] if getattr(comp, "shifts", None) is not None else 5
        for _ in range(1000):
            w = rng.standard_normal(3)
            v = rng.standard_normal(3)
            xi = int(rng.integers(m))
            g = comp.subgradient(w, xi)
            lhs = comp.value(v, xi)
            rhs = comp.value(w, xi) + float(g @ (v - w))
            assert lhs >= rhs - 1e-10

    def test_lipschitz_spot_check(self):
        # per-sample gradients of the quadratic instance are 1-Lipschitz
        p, _ = quadratic_problem(n=5, m=6, seed=4)
        rng = np.random.default_rng(12)
        for _ in range(200):
            w, v = rng.standard_normal(5), rng.standard_normal(5)
            xi = int(rng.integers(6))
            gw = p.smooth_grad(w, xi)
            gv = p.smooth_grad(v, xi)
            assert np.linalg.norm(gw - gv) <= p.lipschitz_L * np.linalg.norm(w - v) + 1e-12

    def test_strong_convexity_spot_check(self):
        p, centers = quadratic_problem(n=4, m=7, seed=8)
        rng = np.random.default_rng(3)

        def mean_value(w):
            return sum(p.smooth_value(w, xi) for xi in range(7)) / 7

        def mean_grad(w):
            return spgm.empirical_smooth_gradient(p, w)

        for _ in range(200):
            w, v = rng.standard_normal(4), rng.standard_normal(4)
            gap = mean_value(w) - mean_value(v) - float(mean_grad(v) @ (w - v))
            assert gap >= 0.5 * p.strong_convexity * float((w - v) @ (w - v)) - 1e-10

    def test_invalid_problem_parameters(self):
        with pytest.raises(ValueError):
            CompositeProblem(dimension=0, sample_count=1,
                             smooth_value=lambda w, xi: 0.0,
                             smooth_grad=lambda w, xi: w,
                             nonsmooth=spgm.ZeroComponent(), lipschitz_L=1.0)
        with pytest.raises(ValueError):
            CompositeProblem(dimension=1, sample_count=1,
                             smooth_value=lambda w, xi: 0.0,
                             smooth_grad=lambda w, xi: w,
                             nonsmooth=spgm.ZeroComponent(), lipschitz_L=0.0)


def test_power_iteration_matches_dense_eigenvalue():
    rng = np.random.default_rng(21)
    a = rng.standard_normal((8, 8))
    q = a @ a.T

    est = spgm.power_iteration_lmax(lambda v: q @ v, 8, iters=500)
    exact = float(np.linalg.eigvalsh(q).max())
    assert est == pytest.approx(exact, rel=1e-6)
