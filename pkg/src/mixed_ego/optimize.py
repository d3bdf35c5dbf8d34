"""Sequential enrichment loops and their post-processing.

One loop implementation backs all entry points: fit surrogates on the
evaluated sample, maximize an acquisition over the (surrogate-feasible)
design space, evaluate the chosen point, repeat until the evaluation budget
is spent.  ``run_ego`` is the unconstrained single-objective case,
``run_sego`` restricts the inner search to the region where constraint
surrogate means are feasible, and ``run_segomoe`` adds bi-objective
acquisitions with a scalarized regularization plus an NSGA-II pass over the
final surrogates to predict the Pareto front.  Mixed spaces are handled by
decoding every inner-search candidate to a valid point.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.optimize import minimize

from .acquisition import (AcquisitionConfig, EHVI_KIND, EI, MO_KINDS, WB2,
                          WB2S, expected_improvement, mo_acquisition,
                          regularized, wb2s, wb2s_scale)
from .gp import FitOptions, fit_gp
from .kernels import CR, default_config
from .metrics import dominates, pareto_filter, pareto_mask
from .pls import AdaptivePlsConfig, EmbeddingSpec, adaptive_components
from .problems import Problem
from .space import (CATEGORICAL, INTEGER, DesignSpace, Doe, MixedPoint,
                    continuous_var)

__all__ = [
    "OptimizerConfig",
    "EvalRecord",
    "RunHistory",
    "ParetoArchive",
    "dominates",
    "run_ego",
    "run_sego",
    "run_segomoe",
    "run_embedded",
    "nsga2_search",
    "nsga2_postprocess",
]


@dataclass
class OptimizerConfig:
    """Budgets, seeds, surrogate choices, and inner-search effort.

    ``doe_size`` defaults to 2d + 2c + 1 (d design variables, c constraints)
    and ``budget`` to 20d; the budget counts every problem evaluation,
    initial sample included.
    """

    doe_size: int | None = None
    budget: int | None = None
    seed: int = 0
    tolerance: float = 1e-4
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    kernel: str = CR
    hier_mode: str | None = None
    n_components: int | None = None
    adaptive_pls: AdaptivePlsConfig | None = None
    embedding: EmbeddingSpec | None = None
    multistart: int = 5
    fit_maxiter: int = 120
    n_random: int = 256
    n_local: int = 2
    local_maxiter: int = 40
    evolve_generations: int = 0
    nsga_generations: int = 60
    nsga_population: int = 100

    def resolve(self, problem: Problem) -> tuple[int, int]:
        d = problem.space.n_vars
        c = problem.n_ineq + problem.n_eq
        doe_size = self.doe_size if self.doe_size is not None else 2 * d + 2 * c + 1
        budget = self.budget if self.budget is not None else 20 * d
        if doe_size < 1:
            raise ValueError("doe_size must be >= 1")
        if budget < doe_size:
            raise ValueError("budget must cover the initial sample")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        return doe_size, budget

    def to_dict(self) -> dict:
        d = asdict(self)
        d["acquisition"] = asdict(self.acquisition)
        if self.adaptive_pls is not None:
            d["adaptive_pls"] = asdict(self.adaptive_pls)
        if self.embedding is not None:
            d["embedding"] = self.embedding.to_dict()
        return d


@dataclass
class EvalRecord:
    """One problem evaluation and the state of the search after it."""

    index: int
    point: MixedPoint
    x: np.ndarray
    y: np.ndarray
    g: np.ndarray
    h: np.ndarray
    feasible: bool
    best_feasible: float
    wall_ms: float
    note: str = ""


class RunHistory:
    """Complete trace of one optimization run."""

    def __init__(self, problem_name: str, space: DesignSpace, config: OptimizerConfig):
        self.problem_name = problem_name
        self.space = space
        self.config = config
        self.records: list[EvalRecord] = []

    def __len__(self):
        return len(self.records)

    def append(self, record: EvalRecord):
        self.records.append(record)

    @property
    def F(self) -> np.ndarray:
        return np.array([r.y for r in self.records])

    @property
    def feasible_mask(self) -> np.ndarray:
        return np.array([r.feasible for r in self.records], dtype=bool)

    @property
    def valid_mask(self) -> np.ndarray:
        return np.array(["eval-failed" not in r.note for r in self.records], dtype=bool)

    def best_trace(self) -> np.ndarray:
        return np.array([r.best_feasible for r in self.records])

    @property
    def best_point(self) -> MixedPoint | None:
        best, arg = np.inf, None
        for r in self.records:
            if r.feasible and r.y[0] < best:
                best, arg = r.y[0], r.point
        return arg

    def to_csv(self, path):
        q = self.records[0].y.shape[0] if self.records else 0
        m = self.records[0].g.shape[0] if self.records else 0
        p = self.records[0].h.shape[0] if self.records else 0
        dprime = self.space.relaxed_dim
        cols = (["iteration", "eval_count"]
                + [f"x{j}" for j in range(dprime)]
                + [f"y{j}" for j in range(q)]
                + [f"g{j}" for j in range(m)]
                + [f"h{j}" for j in range(p)]
                + ["feasible", "best_feasible", "note", "wall_ms"])
        with open(path, "w") as fh:
            fh.write(",".join(cols) + "\n")
            for r in self.records:
                row = ([str(r.index), str(r.index + 1)]
                       + [f"{v:.17g}" for v in r.x]
                       + [f"{v:.17g}" for v in r.y]
                       + [f"{v:.17g}" for v in r.g]
                       + [f"{v:.17g}" for v in r.h]
                       + [str(int(r.feasible)), f"{r.best_feasible:.17g}",
                          r.note, f"{r.wall_ms:.3f}"])
                fh.write(",".join(row) + "\n")

    def manifest(self, algorithm: str) -> dict:
        import platform
        import scipy
        return {
            "problem": self.problem_name,
            "algorithm": algorithm,
            "seed": self.config.seed,
            "config": self.config.to_dict(),
            "space": self.space.to_dict(),
            "n_evaluations": len(self.records),
            "final_best_feasible": (float(self.records[-1].best_feasible)
                                    if self.records else float("nan")),
            "versions": {
                "mixed_ego": "0.1.0",
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "python": platform.python_version(),
            },
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        }


@dataclass
class ParetoArchive:
    """Nondominated evaluated points and the surrogate-predicted front."""

    points: list
    F: np.ndarray
    predicted_pf: np.ndarray | None = None
    predicted_ps: np.ndarray | None = None

    @classmethod
    def from_history(cls, history: RunHistory) -> "ParetoArchive":
        feas = history.feasible_mask
        pts = [r.point for r, ok in zip(history.records, feas) if ok]
        F = history.F[feas] if feas.any() else np.zeros((0, 1))
        if len(pts) == 0:
            return cls([], np.zeros((0, F.shape[1] if F.ndim == 2 else 1)))
        mask = pareto_mask(F)
        return cls([p for p, ok in zip(pts, mask) if ok], np.atleast_2d(F)[mask])


# ---------------------------------------------------------------------------
# inner acquisition search
# ---------------------------------------------------------------------------

def _batch_encode(space, points):
    V = np.array([[float(p.values[i]) for i in range(space.n_vars)] for p in points])
    A = np.array([space.active_mask(p.values) for p in points])
    return V, A


def _models_means(models, V, A):
    if not models:
        return np.zeros((V.shape[0], 0))
    return np.column_stack([m.predict_arrays(V, A)[0] for m in models])


def _violation(gm, hm, tol):
    v = np.zeros(gm.shape[0])
    if gm.shape[1]:
        v += np.maximum(gm, 0.0).sum(axis=1)
    if hm.shape[1]:
        v += np.maximum(np.abs(hm) - tol, 0.0).sum(axis=1)
    return v


class _InnerSearch:
    """Random multistart plus local polish of the continuous coordinates.

    The candidate pool mixes uniform draws with face-biased draws (criteria
    often peak where several coordinates sit at their bounds) and normal
    perturbations of the incumbent.
    """

    def __init__(self, space: DesignSpace, config: OptimizerConfig,
                 g_models, h_models, rng: np.random.Generator,
                 incumbent: MixedPoint | None = None):
        self.space = space
        self.config = config
        self.g_models = g_models
        self.h_models = h_models
        self.rng = rng
        self.pool = self._draw_pool(incumbent)
        self.V, self.A = _batch_encode(space, self.pool)
        self.gm = _models_means(g_models, self.V, self.A)
        self.hm = _models_means(h_models, self.V, self.A)
        tol = config.tolerance
        self.feas = (np.all(self.gm <= 0.0, axis=1)
                     & np.all(np.abs(self.hm) <= tol, axis=1))
        self.fallback = bool(len(g_models) + len(h_models)) and not self.feas.any()
        self.cont_idx = [i for i in space.continuous_idx]

    def _draw_pool(self, incumbent):
        n = self.config.n_random
        rng = self.rng
        space = self.space
        n_face = n // 5 if space.n_continuous else 0
        n_near = 3 * n // 10 if incumbent is not None else 0
        pool = [space.random_point(rng) for _ in range(n - n_face - n_near)]
        for _ in range(n_face):
            vals = list(space.random_point(rng).values)
            for i in space.continuous_idx:
                if rng.uniform() < 0.7:
                    v = space.variables[i]
                    vals[i] = v.upper if rng.uniform() < 0.5 else v.lower
            pool.append(space.impute(MixedPoint(tuple(vals))))
        for _ in range(n_near):
            vals = list(incumbent.values)
            for i, v in enumerate(space.variables):
                if v.kind == CATEGORICAL:
                    if rng.uniform() < 0.2:
                        vals[i] = int(rng.integers(v.n_levels))
                elif v.kind == INTEGER:
                    if rng.uniform() < 0.3:
                        vals[i] = int(np.clip(vals[i] + rng.choice((-1, 1)),
                                              v.lower, v.upper))
                else:
                    sd = 0.1 * (v.upper - v.lower) * (10.0 ** rng.uniform(-1.5, 0))
                    vals[i] = float(np.clip(vals[i] + rng.normal(0.0, sd),
                                            v.lower, v.upper))
            pool.append(space.impute(MixedPoint(tuple(vals))))
        return pool

    def _point_scores(self, score_fn):
        if self.fallback:
            return -_violation(self.gm, self.hm, self.config.tolerance)
        scores = score_fn(self.V, self.A)
        return np.where(self.feas, scores, -np.inf) if (self.g_models or self.h_models) \
            else scores

    def _polish(self, point: MixedPoint, score_fn) -> MixedPoint:
        cont = self.cont_idx
        if not cont or self.config.local_maxiter < 1:
            return point
        space = self.space
        x0 = np.array([float(point.values[i]) for i in cont])
        lo = np.array([space.variables[i].lower for i in cont])
        hi = np.array([space.variables[i].upper for i in cont])

        def assemble(xc):
            vals = list(point.values)
            for j, i in enumerate(cont):
                vals[i] = float(np.clip(xc[j], lo[j], hi[j]))
            return space.impute(MixedPoint(tuple(vals)))

        def neg_score(xc):
            p = assemble(xc)
            V, A = _batch_encode(space, [p])
            if self.fallback:
                gm = _models_means(self.g_models, V, A)
                hm = _models_means(self.h_models, V, A)
                return float(_violation(gm, hm, self.config.tolerance)[0])
            return -float(score_fn(V, A)[0])

        constraints = []
        if not self.fallback:
            for gm in self.g_models:
                constraints.append({
                    "type": "ineq",
                    "fun": lambda xc, m=gm: -float(m.predict_arrays(
                        *_batch_encode(self.space, [assemble(xc)]))[0][0]),
                })
            for hmod in self.h_models:
                constraints.append({
                    "type": "ineq",
                    "fun": lambda xc, m=hmod: self.config.tolerance - abs(float(
                        m.predict_arrays(*_batch_encode(self.space, [assemble(xc)]))[0][0])),
                })
        try:
            res = minimize(neg_score, x0, method="COBYLA",
                           bounds=list(zip(lo, hi)), constraints=constraints,
                           options={"maxiter": self.config.local_maxiter,
                                    "rhobeg": 0.2 * float(np.max(hi - lo))})
            cand = assemble(res.x)
        except Exception:
            return point
        return cand

    def _evolve(self, score_fn):
        """Evolutionary refinement of the pool (stochastic-ranking flavor):
        mutation plus uniform crossover of the elites, scored in batches."""
        space = self.space
        rng = self.rng
        pool = list(self.pool)
        scores = self._point_scores(score_fn)
        n_gen = self.config.evolve_generations
        n_child = max(len(pool) // 2, 8)
        lo = np.array([space.variables[i].lower for i in space.continuous_idx])
        hi = np.array([space.variables[i].upper for i in space.continuous_idx])
        for gen in range(n_gen):
            elite_ids = np.argsort(-scores)[: max(n_child // 4, 4)]
            elites = [pool[int(i)] for i in elite_ids]
            sigma = 0.3 * 0.5 ** (gen / max(n_gen - 1, 1))
            children = []
            for _ in range(n_child):
                a, b = rng.integers(len(elites), size=2)
                vals = [elites[a].values[i] if rng.uniform() < 0.5 else elites[b].values[i]
                        for i in range(space.n_vars)]
                for j, i in enumerate(space.continuous_idx):
                    if rng.uniform() < 0.8:
                        vals[i] = float(np.clip(vals[i] + rng.normal(0, sigma * (hi[j] - lo[j])),
                                                lo[j], hi[j]))
                for i in space.integer_idx:
                    if rng.uniform() < 0.3:
                        v = space.variables[i]
                        vals[i] = int(np.clip(vals[i] + rng.choice((-1, 1)), v.lower, v.upper))
                for i in space.categorical_idx:
                    if rng.uniform() < 0.2:
                        vals[i] = int(rng.integers(space.variables[i].n_levels))
                children.append(space.impute(MixedPoint(tuple(vals))))
            Vc, Ac = _batch_encode(space, children)
            gm = _models_means(self.g_models, Vc, Ac)
            hm = _models_means(self.h_models, Vc, Ac)
            if self.fallback:
                child_scores = -_violation(gm, hm, self.config.tolerance)
            else:
                child_scores = score_fn(Vc, Ac)
                if self.g_models or self.h_models:
                    ok = (np.all(gm <= 0.0, axis=1)
                          & np.all(np.abs(hm) <= self.config.tolerance, axis=1))
                    child_scores = np.where(ok, child_scores, -np.inf)
            pool.extend(children)
            scores = np.concatenate([scores, child_scores])
            keep = np.argsort(-scores)[: self.config.n_random]
            pool = [pool[int(i)] for i in keep]
            scores = scores[keep]
        return pool, scores

    def propose(self, score_fn, existing: set) -> tuple[MixedPoint, str]:
        if self.config.evolve_generations > 0:
            pool, scores = self._evolve(score_fn)
        else:
            pool, scores = self.pool, self._point_scores(score_fn)
        order = np.argsort(-scores)
        candidates = []
        for k in order[: max(self.config.n_local, 1)]:
            if np.isfinite(scores[k]):
                candidates.append(self._polish(pool[k], score_fn))
        for k in order:
            if np.isfinite(scores[k]):
                candidates.append(pool[k])
        if not candidates:  # every candidate infeasible under a score of -inf
            candidates = [pool[int(order[0])]]
        scored = []
        for p in candidates:
            V, A = _batch_encode(self.space, [p])
            if self.fallback:
                val = -float(_violation(_models_means(self.g_models, V, A),
                                        _models_means(self.h_models, V, A),
                                        self.config.tolerance)[0])
            else:
                val = float(score_fn(V, A)[0])
            scored.append(val)
        note = "violation-fallback" if self.fallback else ""
        for k in np.argsort(-np.asarray(scored)):
            p, extra = self._dedupe(candidates[int(k)], existing)
            if p is not None:
                return p, (note + ("," + extra if extra and note else extra))
        raise RuntimeError("could not produce a new distinct infill point")

    def _dedupe(self, point: MixedPoint, existing: set):
        key = self._key(point)
        if key not in existing:
            return point, ""
        if self.cont_idx:
            vals = list(point.values)
            for i in self.cont_idx:
                v = self.space.variables[i]
                span = v.upper - v.lower
                vals[i] = float(np.clip(vals[i] + self.rng.uniform(-1, 1) * 1e-8 * span,
                                        v.lower, v.upper))
            jittered = self.space.impute(MixedPoint(tuple(vals)))
            if self._key(jittered) not in existing:
                return jittered, "jittered-duplicate"
        for _ in range(200):
            p = self.space.random_point(self.rng)
            if self._key(p) not in existing:
                return p, "random-restart-duplicate"
        return None, ""

    def _key(self, point: MixedPoint):
        return tuple(np.round(self.space.encode(point), 12))


# ---------------------------------------------------------------------------
# the enrichment loop
# ---------------------------------------------------------------------------

def _evaluate(problem, point, tol):
    try:
        y, g, h = problem.evaluate(point)
        feas = bool(np.all(g <= tol) and np.all(np.abs(h) <= tol))
        return y, g, h, feas, ""
    except Exception:
        q = max(problem.n_obj, 1)
        return (np.full(q, np.nan), np.full(problem.n_ineq, np.nan),
                np.full(problem.n_eq, np.nan), False, "eval-failed")


def _fit_output(space, pts, values, config, seed, warm):
    doe = Doe(space, pts, y=values)
    template = default_config(space, kind=config.kernel, hier_mode=config.hier_mode,
                              nugget=None)
    opts = FitOptions(multistart=config.multistart, maxiter=config.fit_maxiter,
                      seed=seed, warm=warm)
    return fit_gp(doe, template, opts, n_components=config.n_components)


def _run_loop(problem: Problem, config: OptimizerConfig, algorithm: str,
              point_mapper=None) -> RunHistory:
    from dataclasses import replace as _replace
    config = _replace(config)  # the loop records resolved settings on its own copy
    space = problem.space
    doe_size, budget = config.resolve(problem)
    record_space = point_mapper.space if point_mapper is not None else space
    history = RunHistory(problem.name, record_space, config)
    q = problem.n_obj
    mono = q == 1
    master = np.random.default_rng(config.seed)
    doe_seed = int(master.integers(2 ** 31))

    pts = space.lhs(doe_size, doe_seed)
    existing: set = set()
    search_points: list[MixedPoint] = []  # loop-space twins of the records
    t0 = time.perf_counter()

    def record(point, note=""):
        y, g, h, feas, fail = _evaluate(problem, point, config.tolerance)
        note = ",".join(x for x in (note, fail) if x)
        full_point = point_mapper(point) if point_mapper is not None else point
        x = record_space.encode(full_point)
        if mono:
            prev = history.records[-1].best_feasible if history.records else np.nan
            best = prev
            if feas and (np.isnan(best) or y[0] < best):
                best = float(y[0])
        else:
            best = np.nan  # no scalar incumbent for multi-objective runs
        history.append(EvalRecord(len(history.records), full_point, x, y, g, h,
                                  feas, best, (time.perf_counter() - t0) * 1e3, note))
        search_points.append(point)
        existing.add(tuple(np.round(space.encode(point), 12)))

    for p in pts:
        key = tuple(np.round(space.encode(p), 12))
        tries = 0
        while key in existing:
            p = space.random_point(master)
            key = tuple(np.round(space.encode(p), 12))
            tries += 1
            if tries > 200:
                raise RuntimeError("could not build a duplicate-free initial sample")
        record(p)

    if config.adaptive_pls is not None and config.n_components is None:
        valid = history.valid_mask
        doe0 = Doe(space, [p for p, ok in zip(search_points, valid) if ok],
                   y=history.F[valid][:, :1])
        config.n_components = adaptive_components(doe0, config.adaptive_pls)

    warm_obj = [None] * q
    warm_g = [None] * problem.n_ineq
    warm_h = [None] * problem.n_eq

    for t in range(budget - doe_size):
        iter_seed = int(master.integers(2 ** 31))
        rng = np.random.default_rng(int(master.integers(2 ** 31)))
        valid = history.valid_mask
        model_pts = [p for p, ok in zip(search_points, valid) if ok]
        Y = history.F[valid]
        G = np.array([r.g for r, ok in zip(history.records, valid) if ok])
        H = np.array([r.h for r, ok in zip(history.records, valid) if ok])

        obj_models = []
        for j in range(q):
            m = _fit_output(space, model_pts, Y[:, j], config, iter_seed + j, warm_obj[j])
            warm_obj[j] = getattr(m, "fit_vector_", None)
            obj_models.append(m)
        g_models = []
        for j in range(problem.n_ineq):
            m = _fit_output(space, model_pts, G[:, j], config, iter_seed + 100 + j,
                            warm_g[j])
            warm_g[j] = getattr(m, "fit_vector_", None)
            g_models.append(m)
        h_models = []
        for j in range(problem.n_eq):
            m = _fit_output(space, model_pts, H[:, j], config, iter_seed + 200 + j,
                            warm_h[j])
            warm_h[j] = getattr(m, "fit_vector_", None)
            h_models.append(m)

        incumbent = None
        feas_idx = np.nonzero(history.feasible_mask & valid)[0]
        if feas_idx.size:
            if mono:
                k = int(feas_idx[np.argmin(history.F[feas_idx, 0])])
            else:
                front_ids = feas_idx[pareto_mask(history.F[feas_idx])]
                k = int(front_ids[rng.integers(front_ids.size)])
            incumbent = search_points[k]

        search = _InnerSearch(space, config, g_models, h_models, rng, incumbent)
        score_fn, note = _make_score(history, obj_models, config, mono, search)
        point, extra = search.propose(score_fn, existing)
        record(point, ",".join(x for x in (note, extra) if x))
    return history


def _make_score(history, obj_models, config: OptimizerConfig, mono: bool,
                search: "_InnerSearch"):
    acq = config.acquisition
    feas = history.feasible_mask
    F = history.F
    note = ""
    if mono:
        feas_vals = F[feas, 0] if feas.any() else np.array([])
        y_min = float(np.min(feas_vals)) if feas_vals.size else float(
            np.nanmin(F[history.valid_mask, 0]))
        model = obj_models[0]
        if acq.kind == EI:
            def score(V, A, _m=model):
                mu, var = _m.predict_arrays(V, A)
                return expected_improvement(mu, np.sqrt(var), y_min)
        elif acq.kind in (WB2, WB2S):
            scale = 1.0
            if acq.kind == WB2S:
                # scale from the EI maximizer over this iteration's pool
                mu, var = model.predict_arrays(search.V, search.A)
                ei = expected_improvement(mu, np.sqrt(var), y_min)
                if search.feas.any() and not search.fallback:
                    ei = np.where(search.feas, ei, -np.inf)
                k = int(np.argmax(ei))
                scale = wb2s_scale(float(mu[k]), float(max(ei[k], 0.0)), acq.wb2s_beta)

            def score(V, A, _m=model, _s=scale):
                mu, var = _m.predict_arrays(V, A)
                return wb2s(mu, np.sqrt(var), y_min, _s)
        else:
            raise ValueError(f"{acq.kind!r} is not a mono-objective acquisition")
        return score, note
    # bi-objective
    if acq.kind not in MO_KINDS:
        raise ValueError(f"{acq.kind!r} is not a multi-objective acquisition")
    front = pareto_filter(F[feas]) if feas.any() else np.zeros((0, F.shape[1]))
    ref = acq.ref_point
    if ref is None and feas.any():
        nadir = F[feas].max(axis=0)
        span = F[feas].max(axis=0) - F[feas].min(axis=0)
        ref = tuple(nadir + 0.1 * np.maximum(span, 1.0))

    def score(V, A):
        mus, sds = [], []
        for m in obj_models:
            mu, var = m.predict_arrays(V, A)
            mus.append(mu)
            sds.append(np.sqrt(var))
        MU = np.column_stack(mus)
        SD = np.column_stack(sds)
        if front.shape[0] == 0:
            alpha = np.zeros(MU.shape[0])
        else:
            alpha = mo_acquisition(acq.kind, MU, SD, front,
                                   ref if acq.kind == EHVI_KIND else None)
        return regularized(alpha, MU, acq.gamma, acq.psi)

    return score, note


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def run_ego(problem: Problem, config: OptimizerConfig | None = None) -> RunHistory:
    """Unconstrained single-objective enrichment loop."""
    config = config or OptimizerConfig()
    if problem.n_obj != 1:
        raise ValueError("run_ego expects a single objective")
    return _run_loop(problem, config, "ego")


def run_sego(problem: Problem, config: OptimizerConfig | None = None) -> RunHistory:
    """Constrained single-objective loop: the inner search is restricted to
    the region where constraint surrogate means are within tolerance; when
    that region is empty the iteration minimizes total violation instead."""
    config = config or OptimizerConfig(acquisition=AcquisitionConfig(kind=WB2S))
    if problem.n_obj != 1:
        raise ValueError("run_sego expects a single objective")
    return _run_loop(problem, config, "sego")


def run_segomoe(problem: Problem,
                config: OptimizerConfig | None = None) -> tuple[RunHistory, ParetoArchive]:
    """Constrained (bi-)objective loop plus NSGA-II surrogate post-processing.

    With a single objective this reduces to the constrained loop.  Returns
    the history and the archive holding both the database Pareto front and
    the front predicted from the final surrogates.
    """
    from dataclasses import replace as _replace
    if problem.n_obj == 1:
        cfg = config or OptimizerConfig(acquisition=AcquisitionConfig(kind=WB2S))
        if cfg.acquisition.kind in MO_KINDS:
            # single objective: the hypervolume criteria degenerate to EI
            cfg = _replace(cfg, acquisition=AcquisitionConfig(
                kind=EI, gamma=cfg.acquisition.gamma, psi=cfg.acquisition.psi))
        history = _run_loop(problem, cfg, "segomoe")
        return history, ParetoArchive.from_history(history)
    if problem.n_obj != 2:
        raise ValueError("only one or two objectives are supported")
    config = config or OptimizerConfig(acquisition=AcquisitionConfig(kind=EHVI_KIND))
    if config.acquisition.kind not in MO_KINDS:
        config = _replace(config, acquisition=AcquisitionConfig(
            kind=EHVI_KIND, gamma=config.acquisition.gamma, psi=config.acquisition.psi))
    history = _run_loop(problem, config, "segomoe")
    archive = ParetoArchive.from_history(history)
    predicted = _postprocess_front(problem, history, config)
    archive.predicted_pf = predicted[0]
    archive.predicted_ps = predicted[1]
    return history, archive


def _postprocess_front(problem, history, config):
    valid = history.valid_mask
    pts = [r.point for r, ok in zip(history.records, valid) if ok]
    if len(pts) < 2:
        return np.zeros((0, problem.n_obj)), np.zeros((0, problem.space.relaxed_dim))
    Y = history.F[valid]
    G = np.array([r.g for r, ok in zip(history.records, valid) if ok])
    seed = config.seed + 7919
    obj_models = [_fit_output(problem.space, pts, Y[:, j], config, seed + j, None)
                  for j in range(problem.n_obj)]
    g_models = [_fit_output(problem.space, pts, G[:, j], config, seed + 100 + j, None)
                for j in range(problem.n_ineq)]
    return nsga2_postprocess(obj_models, g_models, [], problem.space,
                             config.nsga_generations, config.nsga_population,
                             seed, config.tolerance)


def run_embedded(problem: Problem, config: OptimizerConfig) -> RunHistory:
    """Optimization in a low-dimensional linear embedding of a continuous box.

    The loop runs over the embedding box; each candidate is back-mapped
    (pseudo-inverse plus clipping) into the problem box before evaluation.
    The history stores full-space points.
    """
    emb = config.embedding
    if emb is None:
        raise ValueError("run_embedded needs config.embedding")
    space = problem.space
    if space.n_categorical or space.n_integer:
        raise ValueError("embedded runs support continuous problems only")
    lo, hi = space.encoded_bounds()
    # the reduced search box follows the sqrt(d_e) random-embedding convention,
    # except for the square identity case where it matches the full cube
    s = 1.0 if emb.d_e == space.n_vars else float(np.sqrt(emb.d_e))
    reduced = DesignSpace([continuous_var(f"u{j}", -s, s)
                           for j in range(emb.d_e)])

    def gamma(u_point: MixedPoint) -> MixedPoint:
        u = np.asarray(u_point.values, dtype=float)
        xn = emb.back_map(u)
        # midpoint form is exact on symmetric boxes (identity embedding case)
        x = xn * (0.5 * (hi - lo)) + 0.5 * (hi + lo)
        return space.decode(x)

    class _Mapper:
        def __init__(self):
            self.space = space

        def __call__(self, p):
            return gamma(p)

    def ev(u_point):
        return problem.evaluator(gamma(u_point))

    reduced_problem = Problem(problem.name, reduced, n_obj=problem.n_obj,
                              n_ineq=problem.n_ineq, n_eq=problem.n_eq,
                              evaluator=ev, optimum=problem.optimum)
    return _run_loop(reduced_problem, config, "embedded", point_mapper=_Mapper())


# ---------------------------------------------------------------------------
# NSGA-II
# ---------------------------------------------------------------------------

def _nondominated_sort(F: np.ndarray) -> list[np.ndarray]:
    n = F.shape[0]
    dominated_by = [[] for _ in range(n)]
    n_dom = np.zeros(n, dtype=int)
    for i in range(n):
        le = np.all(F[i] <= F, axis=1)
        lt = np.any(F[i] < F, axis=1)
        dom = le & lt
        dominated_by[i] = np.nonzero(dom)[0].tolist()
        ge = np.all(F <= F[i], axis=1)
        gt = np.any(F < F[i], axis=1)
        n_dom[i] = int(np.sum(ge & gt))
    fronts = [np.nonzero(n_dom == 0)[0].tolist()]
    while fronts[-1]:
        nxt = []
        for i in fronts[-1]:
            for j in dominated_by[i]:
                n_dom[j] -= 1
                if n_dom[j] == 0:
                    nxt.append(j)
        fronts.append(nxt)
    return [np.array(f, dtype=int) for f in fronts[:-1]]


def _crowding(F: np.ndarray) -> np.ndarray:
    n, q = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    dist = np.zeros(n)
    for j in range(q):
        order = np.argsort(F[:, j], kind="stable")
        span = F[order[-1], j] - F[order[0], j]
        dist[order[0]] = dist[order[-1]] = np.inf
        if span <= 0:
            continue
        dist[order[1:-1]] += (F[order[2:], j] - F[order[:-2], j]) / span
    return dist


def _rank_population(F, cv):
    """(rank, crowding) with constraint domination: feasible first, then CV."""
    n = F.shape[0]
    rank = np.full(n, np.inf)
    crowd = np.zeros(n)
    feas = cv <= 0
    idx_f = np.nonzero(feas)[0]
    if idx_f.size:
        for r, front in enumerate(_nondominated_sort(F[idx_f])):
            ids = idx_f[front]
            rank[ids] = r
            crowd[ids] = _crowding(F[idx_f][front])
    idx_i = np.nonzero(~feas)[0]
    if idx_i.size:
        base = (np.max(rank[idx_f]) + 1 if idx_f.size else 0)
        order = np.argsort(cv[idx_i], kind="stable")
        rank[idx_i[order]] = base + np.arange(idx_i.size)
        crowd[idx_i] = 0.0
    return rank, crowd


def _sbx(rng, a, b, lo, hi, eta=15.0, prob=0.9):
    c1, c2 = a.copy(), b.copy()
    if rng.uniform() > prob:
        return c1, c2
    for j in range(a.size):
        if rng.uniform() > 0.5 or abs(a[j] - b[j]) < 1e-14:
            continue
        x1, x2 = min(a[j], b[j]), max(a[j], b[j])
        u = rng.uniform()
        beta = (2 * u) ** (1 / (eta + 1)) if u <= 0.5 else (1 / (2 * (1 - u))) ** (1 / (eta + 1))
        c1[j] = np.clip(0.5 * ((x1 + x2) - beta * (x2 - x1)), lo[j], hi[j])
        c2[j] = np.clip(0.5 * ((x1 + x2) + beta * (x2 - x1)), lo[j], hi[j])
    return c1, c2


def _poly_mutation(rng, x, lo, hi, eta=20.0):
    y = x.copy()
    prob = 1.0 / x.size
    for j in range(x.size):
        if rng.uniform() > prob or hi[j] <= lo[j]:
            continue
        u = rng.uniform()
        delta = (2 * u) ** (1 / (eta + 1)) - 1 if u < 0.5 else 1 - (2 * (1 - u)) ** (1 / (eta + 1))
        y[j] = np.clip(x[j] + delta * (hi[j] - lo[j]), lo[j], hi[j])
    return y


def nsga2_search(objectives, constraints, space: DesignSpace,
                 generations: int = 100, population: int = 100, seed: int = 0,
                 tolerance: float = 1e-4):
    """Constraint-dominated NSGA-II over a design space.

    ``objectives(V, A) -> (n, q)`` and ``constraints(V, A) -> (n, m)`` are
    batch evaluators over per-variable values/activity; candidates are
    decoded to valid points, so categorical blocks stay one-hot.  Returns
    (front F, points): the mutually nondominated feasible survivors.
    """
    rng = np.random.default_rng(seed)
    pop = max(4, population + population % 2)
    pts = [space.random_point(rng) for _ in range(pop)]

    def eval_batch(points):
        V, A = _batch_encode(space, points)
        F = np.atleast_2d(objectives(V, A))
        Gm = np.atleast_2d(constraints(V, A)) if constraints is not None else np.zeros((len(points), 0))
        cv = np.maximum(Gm, 0.0).sum(axis=1) if Gm.shape[1] else np.zeros(len(points))
        return F, cv

    F, cv = eval_batch(pts)
    X = np.array([space.encode(p) for p in pts])
    lo, hi = space.encoded_bounds()

    for _ in range(generations):
        rank, crowd = _rank_population(F, cv)

        def tourney():
            i, j = rng.integers(pop), rng.integers(pop)
            if rank[i] < rank[j] or (rank[i] == rank[j] and crowd[i] > crowd[j]):
                return i
            return j

        children = []
        while len(children) < pop:
            a, b = X[tourney()], X[tourney()]
            c1, c2 = _sbx(rng, a, b, lo, hi)
            children.append(_poly_mutation(rng, c1, lo, hi))
            if len(children) < pop:
                children.append(_poly_mutation(rng, c2, lo, hi))
        child_pts = [space.decode(c) for c in children]
        Fc, cvc = eval_batch(child_pts)
        Xc = np.array([space.encode(p) for p in child_pts])

        pts = pts + child_pts
        F = np.vstack([F, Fc])
        cv = np.concatenate([cv, cvc])
        X = np.vstack([X, Xc])
        rank, crowd = _rank_population(F, cv)
        order = np.lexsort((-crowd, rank))[:pop]
        pts = [pts[i] for i in order]
        F, cv, X = F[order], cv[order], X[order]

    feas = cv <= 0
    Fs = F[feas] if feas.any() else F
    Ps = [p for p, ok in zip(pts, feas) if ok] if feas.any() else pts
    mask = pareto_mask(Fs)
    return np.atleast_2d(Fs)[mask], [p for p, ok in zip(Ps, mask) if ok]


def nsga2_postprocess(obj_models, g_models, h_models, space: DesignSpace,
                      generations: int = 100, population: int = 100,
                      seed: int = 0, tolerance: float = 1e-4):
    """Predicted Pareto front from surrogate means, NSGA-II on the final models."""

    def objectives(V, A):
        return np.column_stack([m.predict_arrays(V, A)[0] for m in obj_models])

    def constraints(V, A):
        cols = [m.predict_arrays(V, A)[0] for m in g_models]
        cols += [np.abs(m.predict_arrays(V, A)[0]) - tolerance for m in h_models]
        return np.column_stack(cols) if cols else np.zeros((V.shape[0], 0))

    front, pts = nsga2_search(objectives, constraints, space, generations,
                              population, seed, tolerance)
    X = np.array([space.encode(p) for p in pts]) if pts else np.zeros((0, space.relaxed_dim))
    return front, X
