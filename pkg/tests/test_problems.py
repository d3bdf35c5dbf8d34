import numpy as np
import pytest

from mixed_ego.problems import (ENGINEERING_SCHEMAS, available_problems,
                                eval_cosine, eval_hier_goldstein, eval_mb,
                                eval_standard_mo, eval_toy, get_problem,
                                _load_mb_embedding, _mb_base)
from mixed_ego.metrics import pareto_filter


class TestCosine:
    def test_flat_branch_value(self):
        assert eval_cosine(0.0, 10) == pytest.approx(np.cos(-0.5), abs=1e-12)
        assert eval_cosine(0.0, 10) == pytest.approx(0.87758, abs=1e-5)

    def test_shifted_branch_value(self):
        expected = np.cos(0.4 * np.pi + np.pi / 15 - 0.05)
        assert eval_cosine(0.0, 1) == pytest.approx(expected, abs=1e-12)
        assert eval_cosine(0.0, 1) == pytest.approx(0.1541, abs=1e-4)

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            eval_cosine(1.5, 1)
        with pytest.raises(ValueError):
            eval_cosine(0.5, 14)

    def test_all_levels_attain_near_minus_one(self):
        xs = np.linspace(0, 1, 2000)
        for c in range(1, 14):
            assert min(eval_cosine(float(x), c) for x in xs) < -0.999


class TestToy:
    @pytest.mark.parametrize("x,c,expected", [
        (1.0, 4, -0.5),
        (0.0, 8, 1.0),
        (0.0, 2, 1.0),
    ])
    def test_branch_values(self, x, c, expected):
        assert eval_toy(x, c) == pytest.approx(expected, abs=1e-12)

    def test_domain_checked(self):
        with pytest.raises(ValueError):
            eval_toy(0.5, 10)


class TestHierGoldstein:
    def test_w2_contribution_at_origin(self):
        base = eval_hier_goldstein(50, 50, 50, 50, 1, 1, 1, 1, 0.0, 3, 0)
        with_w2 = eval_hier_goldstein(50, 50, 50, 50, 1, 1, 1, 1, 0.0, 3, 1)
        assert with_w2 - base == pytest.approx(3.0, abs=1e-12)

    def test_w1_three_ignores_z1_z2(self):
        vals = {eval_hier_goldstein(30, 60, 20, 70, z1, z2, 1, 2, 10.0, 3, 1)
                for z1 in (0, 1, 2) for z2 in (0, 1, 2)}
        assert len(vals) == 1

    def test_w1_zero_ignores_x3_x4(self):
        vals = {eval_hier_goldstein(30, 60, x3, x4, 1, 2, 1, 2, 10.0, 0, 1)
                for x3 in (0.0, 50.0) for x4 in (10.0, 90.0)}
        assert len(vals) == 1

    def test_frozen_oracle_value(self):
        # computed once with an independently coded polynomial
        got = eval_hier_goldstein(50, 50, 50, 50, 1, 1, 1, 1, 0.0, 3, 0)
        assert got == pytest.approx(46.065331748610014, rel=1e-12)

    def test_problem_evaluator_insensitive_to_excluded(self):
        prob = get_problem("hier_goldstein")
        sp = prob.space
        rng = np.random.default_rng(0)
        for w1 in range(4):
            vals = list(sp.random_point(rng).values)
            vals[9] = w1
            p1 = sp.impute(sp.point(vals))
            y1 = prob.evaluate(p1)[0][0]
            mask = sp.active_mask(p1.values)
            vals2 = list(vals)
            for i in range(sp.n_vars):
                if not mask[i]:
                    v = sp.variables[i]
                    vals2[i] = (rng.uniform(v.lower, v.upper)
                                if v.kind == "continuous"
                                else int(rng.integers(v.n_levels if v.kind == "categorical"
                                                      else 3)))
            y2 = prob.evaluate(sp.point(vals2))[0][0]
            assert y1 == pytest.approx(y2, abs=1e-12)


class TestModifiedBranin:
    def test_base_grid_minimum_near_one(self):
        u1 = np.linspace(-5, 10, 801)
        u2 = np.linspace(0, 15, 801)
        U1, U2 = np.meshgrid(u1, u2)
        F = np.vectorize(_mb_base)(U1, U2)
        assert 1.0 < F.min() < 1.2

    def test_factorizes_through_embedding(self):
        emb = _load_mb_embedding(10)
        rng = np.random.default_rng(1)
        x1 = rng.uniform(-1, 1, size=10)
        null = np.linalg.svd(emb.A)[2][2:]  # kernel directions of A
        x2 = np.clip(x1 + 0.3 * null[0], -1, 1)
        if np.allclose(emb.A @ x1, emb.A @ x2):
            assert eval_mb(x1, emb) == pytest.approx(eval_mb(x2, emb), abs=1e-12)

    def test_shipped_matrices_regenerate_from_seed(self):
        from mixed_ego.pls import make_embedding
        for d in (10, 100):
            emb = _load_mb_embedding(d)
            fresh = make_embedding("random-gaussian", d, 2, seed=37)
            assert np.allclose(emb.A, fresh.A, atol=1e-15)

    def test_optimum_value_attainable(self):
        prob = get_problem("mb_10")
        emb = _load_mb_embedding(10)
        u_star = np.array([(-3.1763142 - 2.5) / 7.5, (12.35859981 - 7.5) / 7.5])
        x = np.clip(np.linalg.pinv(emb.A) @ u_star, -1, 1)
        val = prob.evaluate(prob.space.decode(x))[0][0]
        assert val == pytest.approx(1.1, abs=0.1)


class TestStandardMo:
    def test_zdt1_corner_values(self):
        f, _ = eval_standard_mo("zdt1", np.array([0.0, 0.0]))
        assert np.allclose(f, [0.0, 1.0])
        f, _ = eval_standard_mo("zdt1", np.array([1.0, 0.0]))
        assert np.allclose(f, [1.0, 0.0])

    def test_bnh_counts(self):
        prob = get_problem("bnh")
        assert prob.n_obj == 2 and prob.n_ineq == 2
        assert prob.space.n_vars == 2

    def test_tnk_osy_counts(self):
        assert get_problem("tnk").n_ineq == 2
        osy = get_problem("osy")
        assert osy.n_ineq == 6 and osy.space.n_vars == 6

    @pytest.mark.parametrize("name", ["zdt1", "zdt2", "zdt3"])
    def test_front_samplers_lie_on_front(self, name):
        prob = get_problem(f"{name}-2d")
        Z = prob.front_sampler(200)
        for f1, f2 in Z:
            x = np.array([f1, 0.0])
            f, _ = eval_standard_mo(name, x)
            assert abs(f[1] - f2) < 1e-12

    def test_zdt3_front_nondominated(self):
        Z = get_problem("zdt3-2d").front_sampler(300)
        assert pareto_filter(Z).shape[0] == Z.shape[0]


class TestRegistry:
    def test_purity_double_evaluation(self):
        # ten thousand random points, each evaluated twice, bit-identical
        rng = np.random.default_rng(5)
        problems = ["cosine", "toy", "hier_goldstein", "mb_10", "zdt1-2d",
                    "zdt2-5d", "zdt3-10d", "bnh", "tnk", "osy"]
        for name in problems:
            prob = get_problem(name)
            for _ in range(1000):
                p = prob.space.random_point(rng)
                a = prob.evaluate(p)
                b = prob.evaluate(p)
                assert np.array_equal(a[0], b[0])
                assert np.array_equal(a[1], b[1])

    def test_schemas_have_no_evaluator(self):
        for name in ENGINEERING_SCHEMAS:
            prob = get_problem(name)
            assert prob.evaluator is None
            with pytest.raises(ValueError):
                prob.evaluate(prob.space.random_point(np.random.default_rng(0)))

    def test_neural_network_hierarchy(self):
        sp = get_problem("neural_network").space
        assert sp.relaxed_dim == 8
        p = sp.point((1e-3, 5, 1, 52, 52, 52, 0))
        active = sp.active_set(p)
        names = {sp.variables[i].name for i in active}
        assert "neurons_1" in names and "neurons_2" not in names and "neurons_3" not in names

    def test_unknown_problem(self):
        with pytest.raises(ValueError):
            get_problem("nonexistent")

    def test_list_is_sorted_and_complete(self):
        names = available_problems()
        assert names == sorted(names)
        assert {"cosine", "toy", "mb_10", "mb_100", "zdt1-2d", "bnh", "tnk",
                "osy", "ceras", "dragon", "family", "production"} <= set(names)
