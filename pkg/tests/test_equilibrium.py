import math

import numpy as np
import pytest

import lvphase as lv
from lvphase.errors import ConfigurationError, DegenerateTrialError, NonConvergenceError


class TestAlphaRule:
    def test_modes(self):
        n = 1000
        assert lv.AlphaRule("kappa_sqrt_log", 1.5).resolve(n) == pytest.approx(
            1.5 * math.sqrt(math.log(n))
        )
        assert lv.AlphaRule("absolute", 7.5).resolve(n) == 7.5
        assert lv.AlphaRule("critical").resolve(n) == pytest.approx(
            math.sqrt(2 * math.log(n))
        )
        assert lv.AlphaRule("multiple_of_critical", 2.0).resolve(n) == pytest.approx(
            2.0 * math.sqrt(2 * math.log(n))
        )

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            lv.AlphaRule("bogus", 1.0)
        with pytest.raises(ConfigurationError):
            lv.AlphaRule("absolute")  # missing parameter
        with pytest.raises(ConfigurationError):
            lv.AlphaRule("absolute", -1.0).resolve(100)
        with pytest.raises(ConfigurationError):
            lv.AlphaRule("critical").resolve(1)


class TestLargestSingularValue:
    def test_identity(self):
        for n in (1, 3, 40):
            assert lv.largest_singular_value(np.eye(n)) == pytest.approx(1.0, rel=1e-9)

    def test_rank_one(self):
        u = np.array([3.0, 0.0, 4.0])
        v = np.array([1.0, 2.0])
        M = np.zeros((3, 3))
        M[:, :2] = np.outer(u, v)
        expected = np.linalg.norm(u) * np.linalg.norm(v)
        assert lv.largest_singular_value(M) == pytest.approx(expected, rel=1e-9)

    def test_zero_matrix(self):
        assert lv.largest_singular_value(np.zeros((6, 6))) == 0.0

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_against_svd(self, seed):
        rng = np.random.default_rng(seed)
        M = rng.standard_normal((50, 50))
        exact = np.linalg.svd(M, compute_uv=False)[0]
        est = lv.largest_singular_value(M, tol=1e-10, max_iter=50_000)
        assert est == pytest.approx(exact, rel=1e-6)

    def test_block_one_matches(self):
        rng = np.random.default_rng(3)
        M = rng.standard_normal((30, 30))
        exact = np.linalg.svd(M, compute_uv=False)[0]
        est = lv.largest_singular_value(M, tol=1e-10, max_iter=200_000, block_size=1)
        assert est == pytest.approx(exact, rel=1e-5)

    def test_gaussian_edge(self):
        # s(A/sqrt(n)) concentrates near 2 for large n
        n = 2000
        A = lv.sample_matrix(lv.EnsembleSpec("gaussian", n), lv.SeedScheme(8, 0))
        s = lv.largest_singular_value(A, tol=1e-5, max_iter=5000) / math.sqrt(n)
        assert 1.9 <= s <= 2.1

    def test_non_convergence_carries_estimate(self):
        rng = np.random.default_rng(9)
        M = rng.standard_normal((10, 10))
        exact = np.linalg.svd(M, compute_uv=False)[0]
        with pytest.raises(NonConvergenceError) as err:
            lv.largest_singular_value(M, tol=1e-18, max_iter=1, block_size=1)
        assert 0.0 < err.value.last_estimate <= exact + 1e-9
        assert err.value.iterations == 1

    def test_early_stop(self):
        M = np.diag([5.0, 1.0, 0.5])
        est = lv.largest_singular_value(M, early_stop_at=2.0)
        assert est >= 2.0

    def test_input_validation(self):
        with pytest.raises(ConfigurationError):
            lv.largest_singular_value(np.ones((2, 3)))
        with pytest.raises(ConfigurationError):
            lv.largest_singular_value(np.eye(2), tol=0.0)


class TestSolveEquilibrium:
    def test_zero_matrix_identity_resolvent(self):
        sol = lv.solve_equilibrium(np.zeros((5, 5)), 2.0)
        assert np.allclose(sol.x, 1.0)
        assert np.allclose(sol.z, 0.0)
        assert np.allclose(sol.r_resid, 0.0)
        assert sol.feasible
        assert sol.guard_sigma == 0.0
        assert sol.min_x == sol.max_x == 1.0

    def test_two_by_two_against_direct_inversion(self):
        # A/(alpha sqrt n) = [[0, 0.5], [0, 0]] with alpha=1, n=2
        alpha = 1.0
        A = np.array([[0.0, 0.5 * math.sqrt(2.0)], [0.0, 0.0]])
        sol = lv.solve_equilibrium(A, alpha)
        oracle = np.linalg.solve(np.eye(2) - A / (alpha * math.sqrt(2)), np.ones(2))
        assert np.allclose(sol.x, [1.5, 1.0], atol=1e-14)
        assert np.allclose(sol.x, oracle, atol=1e-14)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_reconstruction_identity(self, seed):
        n = 120
        A = lv.sample_matrix(lv.EnsembleSpec("gaussian", n), lv.SeedScheme(seed, 0))
        alpha = 2.0 * math.sqrt(2.0 * math.log(n))
        sol = lv.solve_equilibrium(A, alpha)
        z, big_r = lv.decompose(A, alpha)
        rebuilt = 1.0 + z / alpha + big_r / alpha**2
        assert np.max(np.abs(rebuilt - sol.x) / np.abs(sol.x)) < 1e-10

    def test_reconstruction_identity_nh(self):
        n = 100
        r = lv.uniform_growth_vector(n)
        A = lv.sample_matrix(lv.EnsembleSpec("gaussian", n), lv.SeedScheme(5, 0))
        alpha = 2.0 * math.sqrt(2.0 * math.log(n))
        sol = lv.solve_equilibrium(A, alpha, r)
        rebuilt = r.values + sol.z / alpha + sol.r_resid / alpha**2
        assert np.max(np.abs(rebuilt - sol.x) / np.abs(sol.x)) < 1e-10
        # remainder agrees with the directly formed (A/sqrt n)^2 Q r
        _, big_r = lv.decompose(A, alpha, r)
        assert np.allclose(sol.r_resid, big_r, atol=1e-9)

    def test_residual_certificate(self):
        n = 300
        A = lv.sample_matrix(lv.EnsembleSpec("gaussian", n), lv.SeedScheme(6, 0))
        sol = lv.solve_equilibrium(A, 3.0)
        assert sol.residual <= 1e-8 * math.sqrt(n)

    def test_degenerate_raises_with_guard(self):
        # A = 2 I at alpha=1, n=2: s(A/(alpha sqrt 2)) = sqrt(2) > 1
        with pytest.raises(DegenerateTrialError) as err:
            lv.solve_equilibrium(2.0 * np.eye(2), 1.0)
        assert err.value.guard_sigma == pytest.approx(math.sqrt(2.0), rel=1e-3)

    def test_guard_boundary_is_strict(self):
        # diagonal values make s exactly computable: s = d / (alpha sqrt n)
        n = 4
        alpha = 1.0
        ok = np.diag([0.9 * alpha * math.sqrt(n)] + [0.1] * (n - 1))
        sol = lv.solve_equilibrium(ok, alpha)
        assert sol.guard_sigma == pytest.approx(0.9, abs=1e-4)
        bad = np.diag([(1.0 - 1e-7) * alpha * math.sqrt(n)] + [0.1] * (n - 1))
        with pytest.raises(DegenerateTrialError):
            lv.solve_equilibrium(bad, alpha)

    def test_z_is_scaled_row_sums(self):
        n = 50
        A = lv.sample_matrix(lv.EnsembleSpec("gaussian", n), lv.SeedScheme(7, 0))
        sol = lv.solve_equilibrium(A, 5.0)
        assert np.allclose(sol.z, A.sum(axis=1) / math.sqrt(n))

    def test_input_validation(self):
        with pytest.raises(ConfigurationError):
            lv.solve_equilibrium(np.zeros((3, 3)), 0.0)
        with pytest.raises(ConfigurationError):
            lv.solve_equilibrium(np.zeros((2, 3)), 1.0)
        with pytest.raises(ConfigurationError):
            lv.solve_equilibrium(np.zeros((3, 3)), 1.0, np.ones(4))


class TestZStatistics:
    def test_z_variance_near_one_at_1e4(self):
        # Z_k = row sums / sqrt(n) are exactly i.i.d. N(0,1); stream rows to
        # avoid materializing the 10^4 x 10^4 matrix.
        n = 10_000
        gen = lv.SeedScheme(9, 0).generator()
        z = np.empty(n)
        block = 250
        for i in range(0, n, block):
            z[i : i + block] = gen.standard_normal((block, n)).sum(axis=1)
        z /= math.sqrt(n)
        assert abs(z.var() - 1.0) < 0.05


class TestDecompose:
    def test_zero_matrix(self):
        z, big_r = lv.decompose(np.zeros((4, 4)), 2.0)
        assert np.allclose(z, 0.0) and np.allclose(big_r, 0.0)

    def test_propagates_degenerate(self):
        with pytest.raises(DegenerateTrialError):
            lv.decompose(3.0 * np.eye(3), 1.0)


class TestIsFeasible:
    def test_examples(self):
        assert lv.is_feasible(np.array([1.5, 1.0])) is True
        assert lv.is_feasible(np.array([1.0, -0.1])) is False
        assert lv.is_feasible(np.array([0.0, 1.0])) is False  # strict inequality

    def test_empty_rejected(self):
        with pytest.raises(ConfigurationError):
            lv.is_feasible(np.array([]))


@pytest.mark.slow
class TestRemainderExtremeTrend:
    def test_normalized_remainder_extremes_shrink_as_n_doubles(self):
        # At alpha = alpha*_n the normalized remainder extremes
        # max R / (alpha sqrt(2 log n)) and |min R| / (alpha sqrt(2 log n))
        # drift toward 0; their T=200 sample means must decrease at each
        # doubling of n.
        from lvphase.ensembles import derive_seed

        mean_max, mean_min = [], []
        for i, n in enumerate((500, 1000, 2000)):
            alpha = math.sqrt(2.0 * math.log(n))
            scale = alpha * math.sqrt(2.0 * math.log(n))
            spec = lv.EnsembleSpec("gaussian", n)
            point = derive_seed(1, i)
            top, bot = [], []
            for t in range(200):
                A = lv.sample_matrix(spec, lv.SeedScheme(point, t))
                try:
                    _, big_r = lv.decompose(A, alpha)
                except DegenerateTrialError:
                    continue
                top.append(big_r.max() / scale)
                bot.append(abs(big_r.min()) / scale)
            assert len(top) >= 190
            mean_max.append(np.mean(top))
            mean_min.append(np.mean(bot))
        assert mean_max[0] > mean_max[1] > mean_max[2], f"max trend broken: {mean_max}"
        assert mean_min[0] > mean_min[1] > mean_min[2], f"min trend broken: {mean_min}"


@pytest.mark.slow
class TestNhBoundSandwich:
    def test_min_x_within_loose_nh_bounds(self):
        # proof-style sandwich with slack factor 1.5 on the Gumbel term
        n = 2000
        alpha = 2.0 * math.sqrt(2.0 * math.log(n))
        alpha_star = math.sqrt(2.0 * math.log(n))
        r = lv.uniform_growth_vector(n)
        r_min, r_max, sigma_r = lv.vector_stats(r)
        lower = r_min - sigma_r * (alpha_star / alpha) * 1.5
        spec = lv.EnsembleSpec("gaussian", n)
        for t in range(10):
            A = lv.sample_matrix(spec, lv.SeedScheme(64, t))
            sol = lv.solve_equilibrium(A, alpha, r)
            assert lower <= sol.min_x <= r_max
