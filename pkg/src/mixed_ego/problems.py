"""Analytic benchmark problems and engineering design-space schemas.

Every evaluator is a pure function of a :class:`MixedPoint`; problems are
addressable by name through :func:`get_problem`.  The engineering entries
(CERAS, DRAGON, airframe upgrade, aircraft family, aircraft production,
cantilever, neural network) are design-space schemas only: they document
variable structure and relaxed dimensions but carry no evaluator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .metrics import pareto_filter
from .pls import EmbeddingSpec
from .space import (DesignSpace, MixedPoint, categorical_var, continuous_var,
                    integer_var)

__all__ = [
    "Problem",
    "eval_cosine",
    "eval_toy",
    "eval_hier_goldstein",
    "eval_mb",
    "eval_standard_mo",
    "get_problem",
    "available_problems",
    "ENGINEERING_SCHEMAS",
]


@dataclass(frozen=True)
class Problem:
    """Named problem: space, output counts, evaluator, and known references."""

    name: str
    space: DesignSpace
    n_obj: int = 1
    n_ineq: int = 0
    n_eq: int = 0
    evaluator: callable = None
    optimum: float | None = None
    front_sampler: callable = None

    def evaluate(self, point: MixedPoint):
        """(objectives, inequalities, equalities) as float arrays."""
        if self.evaluator is None:
            raise ValueError(f"problem {self.name!r} is a schema without an evaluator")
        y, g, h = self.evaluator(point)
        return (np.atleast_1d(np.asarray(y, dtype=float)),
                np.atleast_1d(np.asarray(g, dtype=float)) if g is not None else np.zeros(0),
                np.atleast_1d(np.asarray(h, dtype=float)) if h is not None else np.zeros(0))


# ---------------------------------------------------------------------------
# mixed-categorical toy problems
# ---------------------------------------------------------------------------

def eval_cosine(x: float, c: int) -> float:
    """Cosine landscape over one [0, 1] variable and 13 categories (c in 1..13)."""
    if not 0.0 <= x <= 1.0 or not 1 <= c <= 13:
        raise ValueError("cosine domain is [0, 1] x {1..13}")
    if c <= 9:
        return float(np.cos(3.5 * np.pi * x + (0.4 * np.pi + np.pi * c / 15.0) - c / 20.0))
    return float(np.cos(3.5 * np.pi * x - c / 20.0))


_TOY_BRANCHES = (
    lambda x: np.cos(3.6 * np.pi * (x - 2)) + x - 1,
    lambda x: 2 * np.cos(1.1 * np.pi * np.exp(x)) - x / 2 + 2,
    lambda x: np.cos(2 * np.pi * x) + x / 2,
    lambda x: x * (np.cos(3.4 * np.pi * (x - 1)) - (x - 1) / 2),
    lambda x: -x ** 2 / 2,
    lambda x: 2 * np.cos(0.25 * np.pi * np.exp(-x ** 4)) ** 2 - x / 2 + 1,
    lambda x: x * np.cos(3.4 * np.pi * x) - x / 2 + 1,
    lambda x: -x * (np.cos(3.5 * np.pi * x) + x / 2) + 2,
    lambda x: -x ** 5 / 2 + 1,
    lambda x: -np.cos(2.5 * np.pi * x) ** 2 * np.sqrt(x) - 0.5 * np.log(x + 0.5) - 1.3,
)


def eval_toy(x: float, c1: int) -> float:
    """Ten-branch test function over [0, 1] x {0..9}, one branch per level."""
    if not 0.0 <= x <= 1.0 or not 0 <= c1 <= 9:
        raise ValueError("toy domain is [0, 1] x {0..9}")
    return float(_TOY_BRANCHES[c1](x))


def _gold_cont(x1, x2, x3, x4, z3, z4, x5, w2):
    return (53.3108
            + 0.184901 * x1
            - 5.02914e-6 * x1 ** 3
            + 7.72522e-8 * x1 ** z3
            - 0.0870775 * x2
            - 0.106959 * x3
            + 7.98772e-6 * x3 ** z4
            + 0.00242482 * x4
            + 1.32851e-6 * x4 ** 3
            - 0.00146393 * x1 * x2
            - 0.00301588 * x1 * x3
            - 0.00272291 * x1 * x4
            + 0.0017004 * x2 * x3
            + 0.0038428 * x2 * x4
            - 0.000198969 * x3 * x4
            + 1.86025e-5 * x1 * x2 * x3
            - 1.88719e-6 * x1 * x2 * x4
            + 2.50923e-5 * x1 * x3 * x4
            - 5.62199e-5 * x2 * x3 * x4
            + w2 * (5 * np.cos(2 * np.pi * x5 / 100.0) - 2.0))


_GOLD_SUBS = (20.0, 50.0, 80.0)


def eval_hier_goldstein(x1, x2, x3, x4, z1, z2, z3, z4, x5, w1, w2) -> float:
    """Hierarchical Goldstein: w1 selects which of x3/x4/z1/z2 participate.

    Excluded slots of the continuous core are filled with the fixed
    substitutions {20, 50, 80} indexed by the corresponding z variable.
    """
    for v, name in ((x1, "x1"), (x2, "x2"), (x5, "x5")):
        if not 0.0 <= v <= 100.0:
            raise ValueError(f"{name} outside [0, 100]")
    if w1 not in (0, 1, 2, 3) or w2 not in (0, 1):
        raise ValueError("w1 in {0..3}, w2 in {0, 1}")
    if z3 not in (0, 1, 2) or z4 not in (0, 1, 2):
        raise ValueError("z3, z4 in {0, 1, 2}")
    if w1 == 0:
        return float(_gold_cont(x1, x2, _GOLD_SUBS[int(z1)], _GOLD_SUBS[int(z2)],
                                z3, z4, x5, w2))
    if w1 == 1:
        return float(_gold_cont(x1, x2, x3, _GOLD_SUBS[int(z2)], z3, z4, x5, w2))
    if w1 == 2:
        return float(_gold_cont(x1, x2, _GOLD_SUBS[int(z1)], x4, z3, z4, x5, w2))
    return float(_gold_cont(x1, x2, x3, x4, z3, z4, x5, w2))


def _goldstein_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("x1", 0, 100),
        continuous_var("x2", 0, 100),
        continuous_var("x3", 0, 100, role="decreed", parent=9, activate_on=(1, 3)),
        continuous_var("x4", 0, 100, role="decreed", parent=9, activate_on=(2, 3)),
        integer_var("z1", 0, 2, role="decreed", parent=9, activate_on=(0, 2)),
        integer_var("z2", 0, 2, role="decreed", parent=9, activate_on=(0, 1)),
        integer_var("z3", 0, 2),
        integer_var("z4", 0, 2),
        continuous_var("x5", 0, 100),
        categorical_var("w1", 4, role="meta"),
        categorical_var("w2", 2),
    ])


# ---------------------------------------------------------------------------
# modified Branin with a linear embedding
# ---------------------------------------------------------------------------

def _mb_base(u1: float, u2: float) -> float:
    """Branin variant with a linear term: three local minima, global ~1.1."""
    return float(((u2 - 5.1 * u1 ** 2 / (4 * np.pi ** 2) + 5 * u1 / np.pi - 6) ** 2
                  + (10 - 10 / (8 * np.pi)) * np.cos(u1) + 10)
                 + (5 * u1 + 25) / 15.0)


def eval_mb(x, embedding: EmbeddingSpec) -> float:
    """Base function applied to the denormalized image u = A x of x in [-1,1]^n."""
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    u = np.clip(embedding.A @ x, -1.0, 1.0)
    return _mb_base(7.5 * u[0] + 2.5, 7.5 * u[1] + 7.5)


def _load_mb_embedding(d: int) -> EmbeddingSpec:
    text = resources.files("mixed_ego.data").joinpath(f"mb_{d}.json").read_text()
    payload = json.loads(text)
    return EmbeddingSpec(np.asarray(payload["A"]), payload["kind"])


# ---------------------------------------------------------------------------
# standard multi-objective problems
# ---------------------------------------------------------------------------

def _zdt_g(x):
    return 1.0 + 9.0 * np.sum(x[1:]) / (len(x) - 1)


def eval_standard_mo(name: str, x):
    """(objectives, inequality constraints) of ZDT1-3, BNH, TNK, OSY."""
    x = np.asarray(x, dtype=float)
    if name == "zdt1":
        g = _zdt_g(x)
        f1 = x[0]
        return np.array([f1, g * (1.0 - np.sqrt(f1 / g))]), np.zeros(0)
    if name == "zdt2":
        g = _zdt_g(x)
        f1 = x[0]
        return np.array([f1, g * (1.0 - (f1 / g) ** 2)]), np.zeros(0)
    if name == "zdt3":
        g = _zdt_g(x)
        f1 = x[0]
        f2 = g * (1.0 - np.sqrt(f1 / g) - (f1 / g) * np.sin(10.0 * np.pi * f1))
        return np.array([f1, f2]), np.zeros(0)
    if name == "bnh":
        x1, x2 = x
        f = np.array([4 * x1 ** 2 + 4 * x2 ** 2, (x1 - 5) ** 2 + (x2 - 5) ** 2])
        g = np.array([(x1 - 5) ** 2 + x2 ** 2 - 25.0,
                      7.7 - (x1 - 8) ** 2 - (x2 + 3) ** 2])
        return f, g
    if name == "tnk":
        x1, x2 = x
        atan = np.arctan2(x1, x2)
        g = np.array([-(x1 ** 2 + x2 ** 2 - 1.0 - 0.1 * np.cos(16.0 * atan)),
                      (x1 - 0.5) ** 2 + (x2 - 0.5) ** 2 - 0.5])
        return np.array([x1, x2]), g
    if name == "osy":
        x1, x2, x3, x4, x5, x6 = x
        f1 = -(25 * (x1 - 2) ** 2 + (x2 - 2) ** 2 + (x3 - 1) ** 2
               + (x4 - 4) ** 2 + (x5 - 1) ** 2)
        f2 = np.sum(x ** 2)
        g = np.array([2.0 - x1 - x2,
                      x1 + x2 - 6.0,
                      x2 - x1 - 2.0,
                      x1 - 3.0 * x2 - 2.0,
                      (x3 - 3) ** 2 + x4 - 4.0,
                      4.0 - (x5 - 3) ** 2 - x6])
        return np.array([f1, f2]), g
    raise ValueError(f"unknown multi-objective problem {name!r}")


def _zdt_front(name: str, n: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n)
    if name == "zdt1":
        return np.column_stack([t, 1.0 - np.sqrt(t)])
    if name == "zdt2":
        return np.column_stack([t, 1.0 - t ** 2])
    # zdt3: nondominated part of the g = 1 curve, resampled to ~n points
    td = np.linspace(0.0, 1.0, 20 * n)
    f2 = 1.0 - np.sqrt(td) - td * np.sin(10.0 * np.pi * td)
    pts = pareto_filter(np.column_stack([td, f2]))
    idx = np.linspace(0, len(pts) - 1, min(n, len(pts))).astype(int)
    return pts[idx]


# ---------------------------------------------------------------------------
# engineering schemas (design spaces only)
# ---------------------------------------------------------------------------

def _ceras_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("mac_position", 16.0, 18.0),
        continuous_var("wing_aspect_ratio", 5.0, 11.0),
        continuous_var("vt_aspect_ratio", 1.5, 6.0),
        continuous_var("ht_aspect_ratio", 1.5, 6.0),
        continuous_var("wing_taper_ratio", 0.0, 1.0),
        continuous_var("wing_sweep_deg", 20.0, 30.0),
        integer_var("cruise_altitude_step", 0, 3),  # 30k + 2k*step ft
        integer_var("engine_count", 2, 4),
        categorical_var("tail_geometry", ("t_tail", "no_t_tail")),
        categorical_var("engine_position", ("front", "rear")),
    ])


def _dragon_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("fan_pressure_ratio", 1.05, 1.3),
        continuous_var("wing_aspect_ratio", 8.0, 12.0),
        continuous_var("wing_sweep_deg", 15.0, 40.0),
        continuous_var("wing_taper_ratio", 0.2, 0.5),
        continuous_var("ht_aspect_ratio", 3.0, 6.0),
        continuous_var("ht_sweep_deg", 20.0, 40.0),
        continuous_var("ht_taper_ratio", 0.3, 0.5),
        continuous_var("tofl_sizing_m", 1800.0, 2500.0),
        continuous_var("climb_speed_ftmin", 300.0, 800.0),
        continuous_var("climb_slope_rad", 0.075, 0.15),
        categorical_var("architecture", 17),
        categorical_var("turboshaft_layout", 2),
    ])


def _family_space() -> DesignSpace:
    shares = [categorical_var(name, ("share", "no_share")) for name in (
        "engine_12", "engine_23", "wing_12", "wing_23", "gear_12", "gear_23",
        "obs_12", "obs_23", "empennage_13", "empennage_32")]
    cont = [
        continuous_var("sweep_1", 30.0, 42.0),
        continuous_var("sweep_2", 30.0, 42.0, role="decreed", parent=2, activate_on=(1,)),
        continuous_var("sweep_3", 30.0, 42.0, role="decreed", parent=3, activate_on=(1,)),
        continuous_var("rear_span_1", 0.72, 0.82),
        continuous_var("rear_span_2", 0.72, 0.82, role="decreed", parent=2, activate_on=(1,)),
        continuous_var("rear_span_3", 0.72, 0.82, role="decreed", parent=3, activate_on=(1,)),
        continuous_var("thickness_1", 0.06, 0.11),
        continuous_var("thickness_2", 0.06, 0.11, role="decreed", parent=2, activate_on=(1,)),
        continuous_var("thickness_3", 0.06, 0.11, role="decreed", parent=3, activate_on=(1,)),
    ]
    return DesignSpace(shares + cont)


def _production_space() -> DesignSpace:
    return DesignSpace([
        categorical_var("skin_site", 21),
        categorical_var("spar_site", 21),
        categorical_var("stringer_site", 21),
        categorical_var("rib_site", 21),
        categorical_var("skin_process", 6),
        categorical_var("spar_process", 5),
        categorical_var("stringer_process", 4),
        categorical_var("rib_process", 5),
    ])


def _airframe_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("bypass_ratio", 9.0, 15.0),
        continuous_var("engine_x", -0.98, -0.80),
        continuous_var("engine_z", -0.39, -0.21),
        categorical_var("obs_architecture", ("CONV", "MEA1", "MEA2", "AEA")),
    ])


def _cantilever_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("length", 10.0, 20.0),
        continuous_var("surface", 1.0, 2.0),
        categorical_var("beam_shape", 12),
    ])


def _neural_net_space() -> DesignSpace:
    return DesignSpace([
        continuous_var("learning_rate", 1e-5, 1e-2),
        integer_var("batch_size_pow", 3, 8),  # 2^k, k in 3..8
        integer_var("hidden_layers", 1, 3, role="meta"),
        integer_var("neurons_1", 50, 55, role="decreed", parent=2, activate_on=(1, 2, 3)),
        integer_var("neurons_2", 50, 55, role="decreed", parent=2, activate_on=(2, 3)),
        integer_var("neurons_3", 50, 55, role="decreed", parent=2, activate_on=(3,)),
        categorical_var("activation", ("relu", "sigmoid")),
    ])


ENGINEERING_SCHEMAS = {
    "ceras": _ceras_space,
    "dragon": _dragon_space,
    "family": _family_space,
    "production": _production_space,
    "airframe_upgrade": _airframe_space,
    "cantilever": _cantilever_space,
    "neural_network": _neural_net_space,
}


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

def _cosine_problem() -> Problem:
    space = DesignSpace([continuous_var("x", 0.0, 1.0), categorical_var("c", 13)])

    def ev(p):
        return [eval_cosine(p.values[0], int(p.values[1]) + 1)], None, None

    return Problem("cosine", space, evaluator=ev, optimum=-0.9999997920896128)


def _toy_problem() -> Problem:
    space = DesignSpace([continuous_var("x", 0.0, 1.0), categorical_var("c1", 10)])

    def ev(p):
        return [eval_toy(p.values[0], int(p.values[1]))], None, None

    return Problem("toy", space, evaluator=ev, optimum=-2.3295938277077726)


def _goldstein_problem() -> Problem:
    space = _goldstein_space()

    def ev(p):
        v = p.values
        return [eval_hier_goldstein(v[0], v[1], v[2], v[3], int(v[4]), int(v[5]),
                                    int(v[6]), int(v[7]), v[8], int(v[9]),
                                    int(v[10]))], None, None

    return Problem("hier_goldstein", space, evaluator=ev)


def _mb_problem(d: int) -> Problem:
    emb = _load_mb_embedding(d)
    space = DesignSpace([continuous_var(f"x{j}", -1.0, 1.0) for j in range(d)])

    def ev(p):
        return [eval_mb(np.asarray(p.values, dtype=float), emb)], None, None

    return Problem(f"mb_{d}", space, evaluator=ev, optimum=1.0265)


def _mo_problem(name: str, d: int | None = None) -> Problem:
    if name.startswith("zdt"):
        d = d or 2
        space = DesignSpace([continuous_var(f"x{j}", 0.0, 1.0) for j in range(d)])
        full = f"{name}-{d}d"

        def ev(p, _name=name):
            f, g = eval_standard_mo(_name, np.asarray(p.values, dtype=float))
            return f, g, None

        return Problem(full, space, n_obj=2, evaluator=ev,
                       front_sampler=lambda n, _name=name: _zdt_front(_name, n))
    bounds = {
        "bnh": [(0.0, 5.0), (0.0, 3.0)],
        "tnk": [(0.0, np.pi), (0.0, np.pi)],
        "osy": [(0.0, 10.0), (0.0, 10.0), (1.0, 5.0), (0.0, 6.0), (1.0, 5.0), (0.0, 10.0)],
    }[name]
    n_ineq = {"bnh": 2, "tnk": 2, "osy": 6}[name]
    space = DesignSpace([continuous_var(f"x{j}", lo, hi) for j, (lo, hi) in enumerate(bounds)])

    def ev(p, _name=name):
        f, g = eval_standard_mo(_name, np.asarray(p.values, dtype=float))
        return f, g, None

    return Problem(name, space, n_obj=2, n_ineq=n_ineq, evaluator=ev)


def _schema_problem(name: str) -> Problem:
    space = ENGINEERING_SCHEMAS[name]()
    n_obj = {"ceras": 1, "dragon": 1, "family": 2, "production": 5,
             "airframe_upgrade": 4, "cantilever": 1, "neural_network": 1}[name]
    n_ineq = {"ceras": 2, "dragon": 5, "family": 2, "production": 2,
              "airframe_upgrade": 4, "cantilever": 0, "neural_network": 0}[name]
    return Problem(name, space, n_obj=n_obj, n_ineq=n_ineq)


_BUILDERS = {
    "cosine": _cosine_problem,
    "toy": _toy_problem,
    "hier_goldstein": _goldstein_problem,
    "mb_10": lambda: _mb_problem(10),
    "mb_100": lambda: _mb_problem(100),
    "bnh": lambda: _mo_problem("bnh"),
    "tnk": lambda: _mo_problem("tnk"),
    "osy": lambda: _mo_problem("osy"),
}
for _name in ("zdt1", "zdt2", "zdt3"):
    for _d in (2, 5, 10):
        _BUILDERS[f"{_name}-{_d}d"] = (
            lambda _n=_name, _dd=_d: _mo_problem(_n, _dd))
for _name in ENGINEERING_SCHEMAS:
    _BUILDERS[_name] = (lambda _n=_name: _schema_problem(_n))


def available_problems() -> list[str]:
    return sorted(_BUILDERS)


def get_problem(name: str) -> Problem:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}") from None
