import numpy as np
import pytest

from mixed_ego.kernels import (CategoricalKernelParams, HierarchicalKernelParams,
                               KernelConfig, alg_distance, alg_embed,
                               assemble_correlation, categorical_corr,
                               continuous_corr, decreed_categorical_corr,
                               hypersphere_matrix, level_corr_matrix,
                               n_free_params, phi_matrix)
from mixed_ego.space import DesignSpace, Doe, categorical_var, continuous_var
from mixed_ego.problems import get_problem


class TestContinuousCorr:
    def test_zero_distance(self):
        assert continuous_corr([0.3, 0.7], [0.3, 0.7], [1.0, 2.0]) == 1.0

    def test_zero_theta(self):
        assert continuous_corr([0.0], [5.0], [0.0]) == 1.0

    def test_closed_form(self):
        assert continuous_corr([0.0], [1.0], [1.0]) == pytest.approx(np.exp(-1), abs=1e-12)

    def test_negative_theta_rejected(self):
        with pytest.raises(ValueError):
            continuous_corr([0.0], [1.0], [-1.0])


class TestHypersphere:
    def test_zero_angles_ones_column(self):
        C = hypersphere_matrix(np.zeros(6), 4)
        assert np.array_equal(C[:, 0], np.ones(4))
        assert np.allclose(C[:, 1:], 0.0)
        assert np.allclose(C @ C.T, np.ones((4, 4)))

    def test_single_level(self):
        assert np.array_equal(hypersphere_matrix(np.zeros(0), 1), [[1.0]])

    def test_right_angle_decorrelates(self):
        C = hypersphere_matrix([np.pi / 2], 2)
        assert abs((C @ C.T)[0, 1]) < 1e-15

    def test_unit_rows(self):
        rng = np.random.default_rng(0)
        for L in (2, 5, 9):
            ang = rng.uniform(0, np.pi, size=L * (L - 1) // 2)
            C = hypersphere_matrix(ang, L)
            assert np.allclose(np.diag(C @ C.T), 1.0, atol=1e-12)

    def test_angle_range_enforced(self):
        with pytest.raises(ValueError):
            hypersphere_matrix([3.5], 2)


class TestPhiMatrix:
    def test_diagonal_params_zero_offdiag(self):
        params = CategoricalKernelParams.create("ehh", 4, theta=0.7, angles=0.0)
        phi = phi_matrix(params)
        off = phi[~np.eye(4, dtype=bool)]
        assert np.allclose(off, 0.0)
        assert np.allclose(np.diag(phi), 0.7)

    def test_unit_correlation_gives_zero(self):
        # rho = 1 entries map to exactly zero regardless of epsilon
        params = CategoricalKernelParams.create("ehh", 3, theta=1.0, angles=0.0)
        assert np.allclose(phi_matrix(params) - np.diag(np.diag(phi_matrix(params))), 0.0)

    def test_rho_zero_value(self):
        # epsilon = e^-2 and rho = 0 give (log eps / 2) * (1 - 0) = -1;
        # off-diagonals are nonpositive by construction
        params = CategoricalKernelParams("ehh", 2,
                                         np.array([1.0, 1.0, np.pi / 2]),
                                         epsilon=float(np.exp(-2)))
        assert phi_matrix(params)[0, 1] == pytest.approx(-1.0, abs=1e-12)

    def test_offdiagonal_nonpositive(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            L = int(rng.integers(2, 8))
            params = CategoricalKernelParams.random("ehh", L, rng)
            phi = phi_matrix(params)
            assert np.all(phi[~np.eye(L, dtype=bool)] <= 1e-15)

    def test_epsilon_domain(self):
        with pytest.raises(ValueError):
            CategoricalKernelParams.create("ehh", 2, epsilon=1.5)


class TestCategoricalCorr:
    def test_self_correlation_all_kinds(self):
        rng = np.random.default_rng(2)
        for kind in ("gd", "cr", "ehh", "hh"):
            params = CategoricalKernelParams.random(kind, 4, rng)
            assert categorical_corr(2, 2, params) == 1.0

    def test_ehh_reduces_to_cr(self):
        rng = np.random.default_rng(3)
        diag = rng.uniform(0.05, 2.0, size=5)
        ehh = CategoricalKernelParams("ehh", 5, np.concatenate([diag, np.zeros(10)]))
        cr = CategoricalKernelParams("cr", 5, diag)
        assert np.allclose(level_corr_matrix(ehh), level_corr_matrix(cr), atol=1e-12)

    def test_cr_tied_diagonal_reduces_to_gd(self):
        gd = CategoricalKernelParams("gd", 6, [1.4])
        cr = CategoricalKernelParams("cr", 6, np.full(6, 0.7))
        assert np.allclose(level_corr_matrix(cr), level_corr_matrix(gd), atol=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        for kind in ("gd", "cr", "ehh", "hh"):
            params = CategoricalKernelParams.random(kind, 7, rng)
            T = level_corr_matrix(params)
            assert np.allclose(T, T.T, atol=1e-15)

    def test_level_out_of_range(self):
        params = CategoricalKernelParams.create("cr", 3)
        with pytest.raises(ValueError):
            categorical_corr(0, 3, params)

    def test_free_param_counts(self):
        assert n_free_params("gd", 9) == 1
        assert n_free_params("cr", 9) == 9
        assert n_free_params("ehh", 9) == 45
        assert n_free_params("hh", 9) == 45


class TestAlgebraicDistance:
    def test_embed_endpoints(self):
        assert np.allclose(alg_embed(0.0, True), [1.0, 0.0])
        assert np.allclose(alg_embed(1.0, True), [0.0, 1.0])

    def test_embed_inactive_origin(self):
        assert np.array_equal(alg_embed(0.7, False), [0.0, 0.0])

    def test_embed_on_unit_circle(self):
        for x in np.linspace(0, 1, 11):
            assert np.linalg.norm(alg_embed(x, True)) == pytest.approx(1.0, abs=1e-12)

    def test_both_inactive_zero(self):
        assert alg_distance(0.3, 0.8, False, False, 2.0) == 0.0

    def test_one_active_equals_theta(self):
        assert alg_distance(0.3, 0.8, True, False, 1.0) == 1.0
        assert alg_distance(0.3, 0.8, False, True, 2.5) == 2.5

    def test_both_active_closed_form(self):
        assert alg_distance(0.0, 1.0, True, True, 1.0) == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_isometry(self):
        rng = np.random.default_rng(5)
        for _ in range(2000):
            u, v = rng.uniform(0, 1, size=2)
            th = rng.uniform(0.1, 5.0)
            d = alg_distance(u, v, True, True, th)
            d_e = th * np.linalg.norm(alg_embed(u, True) - alg_embed(v, True))
            assert abs(d - d_e) < 1e-12

    def test_bounded_by_two_theta(self):
        rng = np.random.default_rng(6)
        for _ in range(2000):
            u, v = rng.uniform(0, 1, size=2)
            assert alg_distance(u, v, True, True, 1.0) <= 2.0

    def test_nonpositive_theta_rejected(self):
        with pytest.raises(ValueError):
            alg_distance(0.1, 0.2, True, True, 0.0)


class TestDecreedCategorical:
    def test_both_excluded_is_one(self):
        params = CategoricalKernelParams.create("cr", 3, theta=1.0)
        assert decreed_categorical_corr(1, 2, False, False, params) == 1.0

    def test_one_included_integrates_diagonal(self):
        params = CategoricalKernelParams.create("cr", 3, theta=1.0)
        val = decreed_categorical_corr(1, 2, True, False, params)
        assert val == pytest.approx(np.exp(-3.0), rel=1e-12)

    def test_both_included_sqrt2_scaling(self):
        params = CategoricalKernelParams.create("cr", 3, theta=0.5)
        val = decreed_categorical_corr(0, 2, True, True, params)
        assert val == pytest.approx(np.exp(-np.sqrt(2) * 1.0), rel=1e-12)
        assert decreed_categorical_corr(2, 2, True, True, params) == 1.0

    def test_gower_distances(self):
        params = CategoricalKernelParams.create("cr", 4, theta=1.0)
        both = decreed_categorical_corr(0, 1, True, True, params, mode="gower", theta_cov=1.0)
        assert both == pytest.approx(np.exp(-np.sqrt(2)), rel=1e-12)
        one = decreed_categorical_corr(0, 1, True, False, params, mode="gower", theta_cov=1.0)
        assert one == pytest.approx(np.exp(-2.0), rel=1e-12)  # L/2 = 2

    def test_imputation_substitutes_level_zero(self):
        params = CategoricalKernelParams.create("cr", 3, theta=0.8)
        val = decreed_categorical_corr(2, 1, False, True, params, mode="imputation")
        assert val == pytest.approx(categorical_corr(0, 1, params), rel=1e-15)

    def test_bad_mode_rejected(self):
        params = CategoricalKernelParams.create("cr", 3)
        with pytest.raises(ValueError):
            decreed_categorical_corr(0, 1, True, True, params, mode="magic")


class TestAssemble:
    def test_single_point(self):
        sp = DesignSpace([continuous_var("x", 0, 1)])
        doe = Doe(sp, [sp.point((0.5,))], y=[1.0])
        cfg = KernelConfig(np.array([1.0]), (), nugget=1e-8)
        R = assemble_correlation(doe, cfg)
        assert R.shape == (1, 1)
        assert R[0, 0] == pytest.approx(1.0 + 1e-8)

    def test_cosine_doe_ehh_cholesky(self):
        prob = get_problem("cosine")
        pts = prob.space.lhs(98, seed=0)
        doe = Doe(prob.space, pts, y=np.zeros(98))
        rng = np.random.default_rng(7)
        params = CategoricalKernelParams.random("ehh", 13, rng)
        cfg = KernelConfig(np.array([1.0]), (params,))
        R = assemble_correlation(doe, cfg)  # raises if not SPD
        assert np.allclose(R, R.T)
        np.linalg.cholesky(R)

    def test_unit_diagonal_before_nugget(self):
        sp = DesignSpace([continuous_var("x", 0, 1), categorical_var("c", 3)])
        rng = np.random.default_rng(8)
        pts, seen = [], set()
        while len(pts) < 10:
            p = sp.random_point(rng)
            k = tuple(np.round(sp.encode(p), 12))
            if k not in seen:
                seen.add(k)
                pts.append(p)
        doe = Doe(sp, pts, y=np.zeros(10))
        cfg = KernelConfig(np.array([0.5]),
                           (CategoricalKernelParams.random("hh", 3, rng),),
                           nugget=1e-9)
        R = assemble_correlation(doe, cfg)
        assert np.allclose(np.diag(R), 1.0 + 1e-9, atol=1e-12)

    def test_hierarchical_goldstein_spd(self):
        prob = get_problem("hier_goldstein")
        sp = prob.space
        rng = np.random.default_rng(9)
        pts, seen = [], set()
        while len(pts) < 40:
            p = sp.random_point(rng)
            k = tuple(np.round(sp.encode(p), 12))
            if k not in seen:
                seen.add(k)
                pts.append(p)
        doe = Doe(sp, pts, y=np.zeros(40))
        cats = tuple(CategoricalKernelParams.random("cr", sp.variables[i].n_levels, rng)
                     for i in sp.categorical_idx)
        hier = HierarchicalKernelParams(rng.uniform(0.1, 2.0, size=4), 1.0, "algebraic")
        cfg = KernelConfig(rng.uniform(0.1, 2.0, size=9), cats, hier)
        R = assemble_correlation(doe, cfg)
        np.linalg.cholesky(R)


class TestConfigSerialization:
    def test_roundtrip_full_precision(self):
        rng = np.random.default_rng(10)
        cats = (CategoricalKernelParams.random("ehh", 4, rng),
                CategoricalKernelParams.random("gd", 2, rng))
        hier = HierarchicalKernelParams(np.array([0.123456789012345]), 1.5, "gower")
        cfg = KernelConfig(rng.uniform(0, 2, size=3), cats, hier, 1e-9)
        back = KernelConfig.from_dict(cfg.to_dict())
        assert np.array_equal(back.theta, cfg.theta)
        for a, b in zip(back.categorical, cfg.categorical):
            assert a.kind == b.kind and np.array_equal(a.values, b.values)
        assert np.array_equal(back.hier.theta_dec, cfg.hier.theta_dec)
        assert back.nugget == cfg.nugget
