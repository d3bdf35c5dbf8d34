"""Mixed hierarchical design spaces and their continuous relaxation.

A design space is an ordered list of variables.  Continuous and integer
variables carry bounds, categorical variables carry a list of levels.
A variable may additionally play a hierarchy role:

* ``neutral``   -- always active,
* ``meta``      -- its value activates or deactivates other variables,
* ``decreed``   -- active only when its parent takes a value in the
  variable's activation set.

Points are encoded into a relaxed continuous vector of dimension
``d' = d + ell + sum(L_j)``: continuous and integer values are copied,
each categorical level becomes a one-hot block.  Excluded (decreed-off)
entries are imputed (domain midpoint / level 0) before encoding so that
two points that differ only in inactive entries share one encoding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Variable",
    "DesignSpace",
    "MixedPoint",
    "Doe",
    "continuous_var",
    "integer_var",
    "categorical_var",
    "lhs_sample",
]

CONTINUOUS = "continuous"
INTEGER = "integer"
CATEGORICAL = "categorical"

NEUTRAL = "neutral"
META = "meta"
DECREED = "decreed"

_KINDS = (CONTINUOUS, INTEGER, CATEGORICAL)
_ROLES = (NEUTRAL, META, DECREED)


@dataclass(frozen=True)
class Variable:
    """One design variable: bounds or levels, plus an optional hierarchy role.

    ``parent`` is the index of the activating variable (meta or categorical)
    and ``activate_on`` the set of parent values (level indices for a
    categorical parent, integer values otherwise) for which this variable
    is active.  Both are only meaningful when ``role == "decreed"``.
    """

    name: str
    kind: str
    lower: float = 0.0
    upper: float = 0.0
    levels: tuple = ()
    role: str = NEUTRAL
    parent: int | None = None
    activate_on: frozenset = frozenset()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.role not in _ROLES:
            raise ValueError(f"unknown variable role {self.role!r}")
        if self.kind == CATEGORICAL:
            if len(self.levels) < 1:
                raise ValueError(f"{self.name}: categorical needs >= 1 level")
        else:
            if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
                raise ValueError(f"{self.name}: bounds must be finite")
            if self.kind == CONTINUOUS and not self.lower < self.upper:
                raise ValueError(f"{self.name}: need lower < upper")
            if self.kind == INTEGER:
                if not float(self.lower).is_integer() or not float(self.upper).is_integer():
                    raise ValueError(f"{self.name}: integer bounds must be whole")
                if not self.lower <= self.upper:
                    raise ValueError(f"{self.name}: need lower <= upper")
        if self.role == DECREED:
            if self.parent is None:
                raise ValueError(f"{self.name}: decreed variable needs a parent")
            if not self.activate_on:
                raise ValueError(f"{self.name}: decreed variable needs activation values")

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        """Number of relaxed dimensions this variable occupies."""
        return self.n_levels if self.kind == CATEGORICAL else 1

    def contains(self, value) -> bool:
        if self.kind == CATEGORICAL:
            return isinstance(value, (int, np.integer)) and 0 <= value < self.n_levels
        if self.kind == INTEGER:
            return float(value).is_integer() and self.lower <= value <= self.upper
        return np.isfinite(value) and self.lower <= value <= self.upper

    def imputed_value(self):
        """Default for excluded entries: midpoint (floor for integers), level 0."""
        if self.kind == CATEGORICAL:
            return 0
        if self.kind == INTEGER:
            return int(np.floor((self.lower + self.upper) / 2.0))
        return 0.5 * (self.lower + self.upper)

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "role": self.role}
        if self.kind == CATEGORICAL:
            d["levels"] = list(self.levels)
        else:
            d["bounds"] = [self.lower, self.upper]
        if self.role == DECREED:
            d["parent"] = self.parent
            d["activation"] = sorted(self.activate_on)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Variable":
        kw = dict(name=d["name"], kind=d["kind"], role=d.get("role", NEUTRAL))
        if d["kind"] == CATEGORICAL:
            kw["levels"] = tuple(d["levels"])
        else:
            kw["lower"], kw["upper"] = d["bounds"]
        if kw["role"] == DECREED:
            kw["parent"] = d["parent"]
            kw["activate_on"] = frozenset(d["activation"])
        return cls(**kw)


def continuous_var(name, lower, upper, role=NEUTRAL, parent=None, activate_on=()):
    return Variable(name, CONTINUOUS, lower=float(lower), upper=float(upper),
                    role=role, parent=parent, activate_on=frozenset(activate_on))


def integer_var(name, lower, upper, role=NEUTRAL, parent=None, activate_on=()):
    return Variable(name, INTEGER, lower=float(lower), upper=float(upper),
                    role=role, parent=parent, activate_on=frozenset(activate_on))


def categorical_var(name, levels, role=NEUTRAL, parent=None, activate_on=()):
    if isinstance(levels, (int, np.integer)):
        levels = tuple(range(levels))
    return Variable(name, CATEGORICAL, levels=tuple(levels),
                    role=role, parent=parent, activate_on=frozenset(activate_on))


@dataclass(frozen=True)
class MixedPoint:
    """Per-variable values: floats, ints, or level indices, in space order."""

    values: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]


class DesignSpace:
    """Ordered collection of variables with hierarchy and relaxation helpers."""

    def __init__(self, variables: Sequence[Variable]):
        self.variables = tuple(variables)
        if not self.variables:
            raise ValueError("empty design space")
        self._validate_hierarchy()
        # relaxed layout: one slice per variable
        offsets, off = [], 0
        for v in self.variables:
            offsets.append(slice(off, off + v.size))
            off += v.size
        self._slices = tuple(offsets)
        self._relaxed_dim = off
        self.continuous_idx = tuple(i for i, v in enumerate(self.variables) if v.kind == CONTINUOUS)
        self.integer_idx = tuple(i for i, v in enumerate(self.variables) if v.kind == INTEGER)
        self.categorical_idx = tuple(i for i, v in enumerate(self.variables) if v.kind == CATEGORICAL)
        self.decreed_idx = tuple(i for i, v in enumerate(self.variables) if v.role == DECREED)

    def _validate_hierarchy(self):
        for i, v in enumerate(self.variables):
            if v.role != DECREED:
                continue
            if not 0 <= v.parent < len(self.variables):
                raise ValueError(f"{v.name}: parent index {v.parent} out of range")
            p = self.variables[v.parent]
            if p.role != META and p.kind != CATEGORICAL:
                raise ValueError(f"{v.name}: parent must be a meta or categorical variable")
            # walk up: parents must form a forest (no cycles)
            seen, j = {i}, v.parent
            while j is not None:
                if j in seen:
                    raise ValueError(f"{v.name}: activation cycle detected")
                seen.add(j)
                pj = self.variables[j]
                j = pj.parent if pj.role == DECREED else None

    # -- counts -----------------------------------------------------------

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_continuous(self) -> int:
        return len(self.continuous_idx)

    @property
    def n_integer(self) -> int:
        return len(self.integer_idx)

    @property
    def n_categorical(self) -> int:
        return len(self.categorical_idx)

    @property
    def has_hierarchy(self) -> bool:
        return bool(self.decreed_idx)

    @property
    def relaxed_dim(self) -> int:
        """d' = d + ell + sum of categorical level counts."""
        return self._relaxed_dim

    def var_slice(self, i: int) -> slice:
        """Columns of the relaxed vector occupied by variable ``i``."""
        return self._slices[i]

    # -- activity ---------------------------------------------------------

    def active_mask(self, values: Sequence) -> np.ndarray:
        """Boolean inclusion flag per variable, a pure function of meta values."""
        mask = np.ones(self.n_vars, dtype=bool)

        def is_active(i: int) -> bool:
            v = self.variables[i]
            if v.role != DECREED:
                return True
            if not is_active(v.parent):
                return False
            return values[v.parent] in v.activate_on

        for i in range(self.n_vars):
            mask[i] = is_active(i)
        return mask

    def active_set(self, point: MixedPoint) -> set:
        """Indices of variables included under the point's meta values."""
        return set(np.nonzero(self.active_mask(point.values))[0].tolist())

    # -- point construction and imputation --------------------------------

    def validate_point(self, point: MixedPoint):
        if len(point) != self.n_vars:
            raise ValueError("point length does not match space")
        mask = self.active_mask(point.values)
        for i, v in enumerate(self.variables):
            if mask[i] and not v.contains(point.values[i]):
                raise ValueError(f"value {point.values[i]!r} outside domain of {v.name}")

    def impute(self, point: MixedPoint) -> MixedPoint:
        """Replace excluded entries by their defaults; idempotent."""
        mask = self.active_mask(point.values)
        vals = list(point.values)
        for i, v in enumerate(self.variables):
            if not mask[i]:
                vals[i] = v.imputed_value()
        return MixedPoint(tuple(vals))

    def point(self, values: Sequence) -> MixedPoint:
        """Validated, imputed point from raw per-variable values."""
        p = MixedPoint(tuple(values))
        self.validate_point(p)
        return self.impute(p)

    # -- relaxation --------------------------------------------------------

    def encode(self, point: MixedPoint) -> np.ndarray:
        """Relaxed vector of length ``relaxed_dim``; excluded entries imputed."""
        self.validate_point(point)
        p = self.impute(point)
        out = np.zeros(self._relaxed_dim)
        for i, v in enumerate(self.variables):
            sl = self._slices[i]
            if v.kind == CATEGORICAL:
                level = int(p.values[i])
                if not 0 <= level < v.n_levels:
                    raise ValueError(f"level {level} out of range for {v.name}")
                out[sl.start + level] = 1.0
            else:
                out[sl.start] = float(p.values[i])
        return out

    def decode(self, vec: np.ndarray) -> MixedPoint:
        """Inverse of :meth:`encode`: clip, round half-up, one-hot argmax.

        One-hot ties resolve to the lowest level index.  The decoded point is
        imputed, so ``decode(encode(p)) == p`` for valid points.
        """
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self._relaxed_dim,):
            raise ValueError(f"expected vector of length {self._relaxed_dim}")
        if np.isnan(vec).any():
            raise ValueError("NaN in relaxed vector")
        vals = []
        for i, v in enumerate(self.variables):
            sl = self._slices[i]
            if v.kind == CATEGORICAL:
                vals.append(int(np.argmax(vec[sl])))
            elif v.kind == INTEGER:
                r = int(np.floor(vec[sl.start] + 0.5))  # ties .5 round half-up
                vals.append(int(np.clip(r, v.lower, v.upper)))
            else:
                vals.append(float(np.clip(vec[sl.start], v.lower, v.upper)))
        return self.impute(MixedPoint(tuple(vals)))

    def encoded_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Box of the relaxed space: variable bounds, [0, 1] one-hot blocks."""
        lo = np.zeros(self._relaxed_dim)
        hi = np.ones(self._relaxed_dim)
        for i, v in enumerate(self.variables):
            if v.kind != CATEGORICAL:
                lo[self._slices[i].start] = v.lower
                hi[self._slices[i].start] = v.upper
        return lo, hi

    # -- sampling ----------------------------------------------------------

    def lhs(self, n: int, seed: int) -> list[MixedPoint]:
        """Latin-hypercube sample: per variable, n stratified draws.

        Continuous dimensions get one sample per equal-probability stratum;
        integer and categorical variables are sampled by stratified
        projection then decoded.  Deterministic for a given seed.
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        pts = []
        cols = []
        for v in self.variables:
            u = (rng.permutation(n) + rng.uniform(size=n)) / n
            cols.append(u)
        for k in range(n):
            vals = []
            for u, v in zip(cols, self.variables):
                x = u[k]
                if v.kind == CATEGORICAL:
                    vals.append(min(int(x * v.n_levels), v.n_levels - 1))
                elif v.kind == INTEGER:
                    span = v.upper - v.lower + 1
                    vals.append(int(np.clip(np.floor(v.lower + x * span), v.lower, v.upper)))
                else:
                    vals.append(v.lower + x * (v.upper - v.lower))
            pts.append(self.impute(MixedPoint(tuple(vals))))
        return pts

    def random_point(self, rng: np.random.Generator) -> MixedPoint:
        vals = []
        for v in self.variables:
            if v.kind == CATEGORICAL:
                vals.append(int(rng.integers(v.n_levels)))
            elif v.kind == INTEGER:
                vals.append(int(rng.integers(int(v.lower), int(v.upper) + 1)))
            else:
                vals.append(float(rng.uniform(v.lower, v.upper)))
        return self.impute(MixedPoint(tuple(vals)))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {"variables": [v.to_dict() for v in self.variables]}

    @classmethod
    def from_dict(cls, d: dict) -> "DesignSpace":
        return cls([Variable.from_dict(vd) for vd in d["variables"]])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, s: str) -> "DesignSpace":
        return cls.from_dict(json.loads(s))


class Doe:
    """Evaluated sample: points plus objective/constraint outputs.

    Output arrays are aligned row-for-row with the points; duplicate encoded
    points are rejected.
    """

    def __init__(self, space: DesignSpace, points: Sequence[MixedPoint],
                 y=None, g=None, h=None):
        self.space = space
        self.points = tuple(points)
        n = len(self.points)
        self.X = np.array([space.encode(p) for p in self.points]) if n else np.zeros((0, space.relaxed_dim))
        if n > 1:
            uniq = np.unique(np.round(self.X, 12), axis=0)
            if uniq.shape[0] != n:
                raise ValueError("duplicate encoded points in DoE")
        self.y = self._as_outputs(y, n, "y")
        self.g = self._as_outputs(g, n, "g")
        self.h = self._as_outputs(h, n, "h")

    @staticmethod
    def _as_outputs(a, n, label):
        if a is None:
            return None
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            a = a[:, None]
        if a.shape[0] != n:
            raise ValueError(f"{label} rows do not align with points")
        return a

    def __len__(self):
        return len(self.points)

    def values_matrix(self) -> np.ndarray:
        """Per-variable numeric values (levels as indices), shape (n, n_vars)."""
        return np.array([[float(p.values[i]) for i in range(self.space.n_vars)]
                         for p in self.points])

    def activity_matrix(self) -> np.ndarray:
        """Per-variable inclusion flags, shape (n, n_vars)."""
        return np.array([self.space.active_mask(p.values) for p in self.points])


def lhs_sample(space: DesignSpace, n: int, seed: int) -> Doe:
    """Latin-hypercube sample wrapped as an output-less DoE."""
    return Doe(space, space.lhs(n, seed))
