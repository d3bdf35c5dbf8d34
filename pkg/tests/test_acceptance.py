"""Acceptance suite: one test per release criterion, each printing a
PASS line with its runtime (run with ``pytest -s`` to see them live).
"""

import json
import re
import time

import numpy as np
import pytest

from mixed_ego.acquisition import AcquisitionConfig, hypervolume
from mixed_ego.gp import LikelihoodModel
from mixed_ego.kernels import (CategoricalKernelParams, HierarchicalKernelParams,
                               KernelConfig, alg_distance, alg_embed,
                               assemble_correlation, level_corr_matrix)
from mixed_ego.metrics import igd_plus, pareto_filter
from mixed_ego.optimize import OptimizerConfig, run_embedded, run_ego, run_segomoe
from mixed_ego.pls import AdaptivePlsConfig, adaptive_components
from mixed_ego.problems import (ENGINEERING_SCHEMAS, eval_cosine, eval_toy,
                                get_problem, _load_mb_embedding)
from mixed_ego.space import (DesignSpace, Doe, MixedPoint, categorical_var,
                             continuous_var, integer_var)


class Stopwatch:
    def __init__(self, label, limit_s):
        self.label = label
        self.limit = limit_s

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        status = "PASS" if exc_type is None else "FAIL"
        print(f"[{self.label}] {status} ({elapsed:.1f}s, limit {self.limit}s)")
        if exc_type is None:
            assert elapsed < self.limit, f"{self.label} exceeded runtime limit"


def test_c01_kernel_reduction_suite():
    rng = np.random.default_rng(101)
    with Stopwatch("criterion 1: kernel reductions", 10):
        for L in range(2, 14):
            diag = rng.uniform(0.02, 3.0, size=L)
            n_ang = L * (L - 1) // 2
            ehh0 = CategoricalKernelParams("ehh", L, np.concatenate([diag, np.zeros(n_ang)]))
            cr = CategoricalKernelParams("cr", L, diag)
            theta = rng.uniform(0.02, 3.0)
            cr_tied = CategoricalKernelParams("cr", L, np.full(L, theta / 2.0))
            gd = CategoricalKernelParams("gd", L, [theta])
            T_ehh, T_cr = level_corr_matrix(ehh0), level_corr_matrix(cr)
            T_tied, T_gd = level_corr_matrix(cr_tied), level_corr_matrix(gd)
            r = rng.integers(L, size=10_000)
            s = rng.integers(L, size=10_000)
            assert np.max(np.abs(T_ehh[r, s] - T_cr[r, s])) < 1e-12
            assert np.max(np.abs(T_tied[r, s] - T_gd[r, s])) < 1e-12


def _random_mixed_doe(rng, kind, hierarchical=False):
    n = int(rng.integers(5, 61))
    if hierarchical:
        L = int(rng.integers(2, 5))
        sp = DesignSpace([
            categorical_var("w", 3, role="meta"),
            continuous_var("x", 0, 1),
            continuous_var("xd", 0, 1, role="decreed", parent=0, activate_on=(0, 1)),
            integer_var("zd", 0, 4, role="decreed", parent=0, activate_on=(1, 2)),
            categorical_var("cd", L, role="decreed", parent=0, activate_on=(0, 2)),
        ])
        cats = (CategoricalKernelParams.random(kind, 3, rng),
                CategoricalKernelParams.random(kind, L, rng))
        hier = HierarchicalKernelParams(rng.uniform(0.05, 3.0, size=2),
                                        rng.uniform(0.1, 2.0),
                                        rng.choice(["algebraic", "gower", "imputation"]))
        cfg = KernelConfig(rng.uniform(0.05, 3.0, size=3), cats, hier)
    else:
        L1, L2 = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        sp = DesignSpace([continuous_var("x1", 0, 1), continuous_var("x2", 0, 1),
                          categorical_var("c1", L1), categorical_var("c2", L2)])
        cats = (CategoricalKernelParams.random(kind, L1, rng),
                CategoricalKernelParams.random(kind, L2, rng))
        cfg = KernelConfig(rng.uniform(0.05, 3.0, size=2), cats, None)
    pts, seen = [], set()
    guard = 0
    while len(pts) < n and guard < 50 * n:
        p = sp.random_point(rng)
        key = tuple(np.round(sp.encode(p), 12))
        guard += 1
        if key not in seen:
            seen.add(key)
            pts.append(p)
    return Doe(sp, pts, y=np.zeros(len(pts))), cfg


def test_c02_spd_suite():
    with Stopwatch("criterion 2: SPD correlation matrices", 60):
        for kind in ("gd", "cr", "ehh", "hh", "hierarchical"):
            rng = np.random.default_rng(hash(kind) % 2 ** 31)
            for _ in range(200):
                if kind == "hierarchical":
                    doe, cfg = _random_mixed_doe(rng, "cr", hierarchical=True)
                else:
                    doe, cfg = _random_mixed_doe(rng, kind)
                R = assemble_correlation(doe, cfg)  # raises on Cholesky failure
                np.linalg.cholesky(R)


def test_c03_algebraic_distance_suite():
    rng = np.random.default_rng(103)
    with Stopwatch("criterion 3: algebraic distance theorems", 30):
        # isometry identity on active pairs
        u = rng.uniform(0, 1, size=20_000)
        v = rng.uniform(0, 1, size=20_000)
        th = rng.uniform(0.05, 5.0, size=20_000)
        d_closed = 2 * th * np.abs(u - v) / (np.sqrt(u * u + 1) * np.sqrt(v * v + 1))
        eu = np.stack([(1 - u * u) / (1 + u * u), 2 * u / (1 + u * u)], axis=1)
        ev_ = np.stack([(1 - v * v) / (1 + v * v), 2 * v / (1 + v * v)], axis=1)
        d_embed = th * np.linalg.norm(eu - ev_, axis=1)
        assert np.max(np.abs(d_closed - d_embed)) < 1e-12
        # triangle inequality over mixed-activity triples
        N = 100_000
        x = rng.uniform(0, 1, size=(N, 3))
        act = rng.uniform(size=(N, 3)) < 0.7
        th = rng.uniform(0.05, 5.0, size=N)

        def embed(col, a):
            e = np.stack([(1 - col ** 2) / (1 + col ** 2), 2 * col / (1 + col ** 2)], axis=1)
            e[~a] = 0.0
            return e

        eu, ew, ev_ = (embed(x[:, j], act[:, j]) for j in range(3))
        d_uv = th * np.linalg.norm(eu - ev_, axis=1)
        d_uw = th * np.linalg.norm(eu - ew, axis=1)
        d_wv = th * np.linalg.norm(ew - ev_, axis=1)
        assert np.all(d_uw + d_wv >= d_uv - 1e-12)
        # spot-check the scalar implementation agrees with the vectorized oracle
        for k in range(200):
            got = alg_distance(x[k, 0], x[k, 1], act[k, 0], act[k, 1], th[k])
            assert got == pytest.approx(th[k] * np.linalg.norm(
                alg_embed(x[k, 0], act[k, 0]) - alg_embed(x[k, 1], act[k, 1])), abs=1e-12)


def _gradient_instance(rng, kind):
    if kind == "hierarchical":
        sp = DesignSpace([
            categorical_var("w", 3, role="meta"),
            continuous_var("x", 0, 1),
            continuous_var("xd", 0, 1, role="decreed", parent=0, activate_on=(0, 1)),
            categorical_var("cd", 3, role="decreed", parent=0, activate_on=(1, 2)),
        ])
        cats = (CategoricalKernelParams.random("cr", 3, rng),
                CategoricalKernelParams.random("cr", 3, rng))
        hier = HierarchicalKernelParams(rng.uniform(0.3, 2.0, size=1), 1.0, "algebraic")
        cfg = KernelConfig(rng.uniform(0.5, 3.0, size=2), cats, hier, nugget=1e-4)
    else:
        L = int(rng.integers(2, 6))
        sp = DesignSpace([continuous_var("x1", 0, 1), continuous_var("x2", 0, 1),
                          categorical_var("c", L)])
        cfg = KernelConfig(rng.uniform(0.5, 3.0, size=2),
                           (CategoricalKernelParams.random(kind, L, rng),),
                           nugget=1e-4)
    n = int(rng.integers(8, 17))
    pts, seen = [], set()
    while len(pts) < n:
        raw = sp.random_point(rng)
        # snap continuous values to a coarse grid: well-separated points keep
        # the correlation matrix comfortably conditioned for the FD oracle
        vals = [round(v / 0.05) * 0.05 if sp.variables[i].kind == "continuous" else v
                for i, v in enumerate(raw.values)]
        p = sp.impute(MixedPoint(tuple(vals)))
        key = tuple(np.round(sp.encode(p), 9))
        if key not in seen:
            seen.add(key)
            pts.append(p)
    return Doe(sp, pts, y=rng.normal(size=n)), cfg


def test_c04_likelihood_gradient_suite():
    with Stopwatch("criterion 4: likelihood gradients", 120):
        for kind in ("gd", "cr", "ehh", "hh", "hierarchical"):
            rng = np.random.default_rng(40_000 + hash(kind) % 10_000)
            for _ in range(50):
                doe, cfg = _gradient_instance(rng, kind)
                m = LikelihoodModel(doe, cfg)
                g = m.gradient(m.x0)
                h = 1e-6
                scale = max(1.0, float(np.max(np.abs(g))))
                for i in range(m.x0.size):
                    e = np.zeros_like(m.x0)
                    e[i] = h
                    fd = (m.value(m.x0 + e) - m.value(m.x0 - e)) / (2 * h)
                    assert abs(fd - g[i]) / scale < 1e-5


def test_c05_adaptive_pls():
    with Stopwatch("criterion 5: adaptive PLS component count", 120):
        sp = DesignSpace([continuous_var(f"x{j}", 0, 1) for j in range(20)])
        hits = 0
        for seed in range(10):
            pts = sp.lhs(60, seed)
            X = np.array([sp.encode(p) for p in pts])
            doe = Doe(sp, pts, y=X[:, 0])
            cfg = AdaptivePlsConfig(d_min=1, d_max=5, threshold=0.95, folds=5, seed=seed)
            hits += adaptive_components(doe, cfg) == 1
        assert hits >= 8
        for d in (1, 3, 5):
            cfg = AdaptivePlsConfig(d_min=d, d_max=d)
            assert adaptive_components(None, cfg, press_fn=None) == d


def test_c06_mb10_optimization():
    with Stopwatch("criterion 6: MB_10 optimization", 15 * 60):
        prob = get_problem("mb_10")
        emb = _load_mb_embedding(10)  # the benchmark's own transfer matrix
        bests = []
        for seed in range(10):
            cfg = OptimizerConfig(doe_size=10, budget=100, seed=seed, embedding=emb,
                                  multistart=4, fit_maxiter=100, n_random=256,
                                  n_local=2, local_maxiter=60)
            h = run_embedded(prob, cfg)
            assert len(h) == 100
            bests.append(h.best_trace()[-1])
        med = float(np.median(bests))
        print(f"  MB_10 bests: {np.round(bests, 3)} median {med:.3f}")
        assert med <= 1.3


def test_c07_mixed_variable_bo():
    with Stopwatch("criterion 7: mixed-variable BO", 20 * 60):
        # grid-search oracles
        xs = np.linspace(0, 1, 1000)
        f_cos = min(eval_cosine(float(x), c) for c in range(1, 14) for x in xs)
        xs_toy = np.linspace(0, 1, 1001)
        f_toy = min(eval_toy(float(x), c) for c in range(10) for x in xs_toy)
        for pname, f_star in (("cosine", f_cos), ("toy", f_toy)):
            prob = get_problem(pname)
            rels = []
            for seed in range(10):
                cfg = OptimizerConfig(doe_size=5, budget=50, seed=seed, kernel="cr",
                                      multistart=4, fit_maxiter=100, n_random=256,
                                      n_local=2, local_maxiter=40)
                h = run_ego(prob, cfg)
                assert len(h) == 50
                rels.append(max(0.0, (h.best_trace()[-1] - f_star) / abs(f_star)))
            med = float(np.median(rels))
            print(f"  {pname}: median relative error {med:.4f}")
            assert med <= 0.02


def test_c08_multi_objective_protocol():
    with Stopwatch("criterion 8: ZDT protocol", 30 * 60):
        final_zdt1 = []
        for pname in ("zdt1-2d", "zdt2-2d", "zdt3-2d"):
            prob = get_problem(pname)
            Z = prob.front_sampler(500)
            improved = 0
            for seed in range(10):
                cfg = OptimizerConfig(doe_size=5, budget=40, seed=seed,
                                      acquisition=AcquisitionConfig(kind="ehvi"),
                                      multistart=4, fit_maxiter=100, n_random=256,
                                      n_local=2, local_maxiter=40,
                                      nsga_generations=30, nsga_population=50)
                h, arch = run_segomoe(prob, cfg)
                assert len(h) == 40
                assert arch.F.shape[0] >= 10
                feas0 = h.feasible_mask[:5]
                init = igd_plus(pareto_filter(h.F[:5][feas0]), Z)
                final = igd_plus(arch.F, Z)
                improved += final < init
                if pname == "zdt1-2d":
                    final_zdt1.append(final)
            print(f"  {pname}: improved in {improved}/10 seeds")
            assert improved >= 9
        print(f"  zdt1 final IGD+: max {max(final_zdt1):.4f}")
        assert max(final_zdt1) < 0.2


def test_c09_constrained_moo_bnh():
    with Stopwatch("criterion 9: constrained MOO (BNH)", 15 * 60):
        prob = get_problem("bnh")
        for seed in (0, 1):
            cfg = OptimizerConfig(seed=seed, acquisition=AcquisitionConfig(kind="ehvi"),
                                  multistart=4, fit_maxiter=100, n_random=256,
                                  n_local=2, local_maxiter=40,
                                  nsga_generations=20, nsga_population=40)
            h, arch = run_segomoe(prob, cfg)
            assert len(h) == 40  # 20 d with d = 2
            # every archive member satisfies the true constraints to 1e-4
            for p in arch.points:
                _, g, _ = prob.evaluate(p)
                assert np.all(g <= 1e-4)
            # archive equals a brute-force nondominated filter of the history
            feas = h.feasible_mask
            expected = []
            F = h.F[feas]
            for i in range(F.shape[0]):
                dominated = any(np.all(F[j] <= F[i]) and np.any(F[j] < F[i])
                                for j in range(F.shape[0]) if j != i)
                if not dominated and tuple(F[i]) not in set(map(tuple, expected)):
                    expected.append(F[i])
            assert sorted(map(tuple, arch.F)) == sorted(map(tuple, expected))


def test_c10_indicator_property_suites():
    rng = np.random.default_rng(110)
    with Stopwatch("criterion 10: IGD+/hypervolume properties", 30):
        for _ in range(10_000):
            Z = pareto_filter(rng.uniform(size=(12, 2)))
            B = rng.uniform(0.1, 1.3, size=(5, 2))
            A = B - rng.uniform(0.0, 0.3, size=(5, 2))
            assert igd_plus(A, Z) <= igd_plus(B, Z) + 1e-12
        ref = np.array([1.5, 1.5])
        for _ in range(10_000):
            pts = rng.uniform(size=(5, 2))
            extra = rng.uniform(0, 1.8, size=2)
            base = hypervolume(pts, ref)
            grown = hypervolume(np.vstack([pts, extra]), ref)
            assert grown >= base - 1e-12


def test_c11_relaxed_dimension_table():
    with Stopwatch("criterion 11: relaxed-dimension table", 10):
        expected = {"ceras": 12, "dragon": 29, "family": 29, "production": 104}
        for name, dim in expected.items():
            assert ENGINEERING_SCHEMAS[name]().relaxed_dim == dim


def test_c12_campaign_reproducibility(tmp_path):
    from mixed_ego.cli import main

    spec = {"problems": ["toy"], "algorithms": ["ego"], "repetitions": 2,
            "doe_size": 5, "budget": 10, "multistart": 2, "fit_maxiter": 40,
            "n_random": 64, "n_local": 1, "local_maxiter": 10}
    cfg = tmp_path / "campaign.json"
    cfg.write_text(json.dumps(spec))
    with Stopwatch("criterion 12: campaign reproducibility", 10 * 60):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(out2)]) == 0

        def normalize(path):
            text = path.read_text()
            if path.suffix == ".csv":
                rows = text.splitlines()
                cols = rows[0].split(",")
                keep = [i for i, c in enumerate(cols) if c != "wall_ms"]
                return "\n".join(",".join(r.split(",")[i] for i in keep) for r in rows)
            return re.sub(r'"timestamp": "[^"]*"', '"timestamp": "-"', text)

        files1 = sorted(p.name for p in out1.iterdir())
        files2 = sorted(p.name for p in out2.iterdir())
        assert files1 == files2
        for name in files1:
            assert normalize(out1 / name) == normalize(out2 / name), name
