"""Quality indicators: dominance, Pareto filtering, IGD+, data profiles."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "dominates",
    "pareto_filter",
    "pareto_mask",
    "FrontReference",
    "igd_plus",
    "data_profile",
]


def dominates(a, b, strict: bool = False) -> bool:
    """Weak dominance a <= b componentwise; ``strict`` additionally a != b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors must have equal length")
    weak = bool(np.all(a <= b))
    if not strict:
        return weak
    return weak and bool(np.any(a < b))


def pareto_mask(F: np.ndarray) -> np.ndarray:
    """Boolean mask of the strictly nondominated rows, deduplicated.

    Equal rows keep a single representative (the first occurrence).
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    n = F.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        if not keep[i]:
            continue
        le = np.all(F <= F[i], axis=1)
        lt = np.any(F < F[i], axis=1)
        if np.any(le & lt):
            keep[i] = False
            continue
        dup = np.all(F == F[i], axis=1)
        dup[: i + 1] = False
        keep[dup] = False
    return keep


def pareto_filter(points) -> np.ndarray:
    """Nondominated subset of a point cloud (minimization, strict dominance)."""
    F = np.asarray(points, dtype=float)
    if F.size == 0:
        return F.reshape(0, F.shape[1] if F.ndim == 2 else 1)
    return np.atleast_2d(F)[pareto_mask(F)]


@dataclass(frozen=True)
class FrontReference:
    """Reference set Z sampled from an analytic Pareto front."""

    Z: np.ndarray

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        object.__setattr__(self, "Z", Z)
        if Z.shape[0] == 0:
            raise ValueError("empty reference set")
        if not pareto_mask(Z).all():
            raise ValueError("reference set must be mutually nondominated")


def igd_plus(A, Z, normalize: bool = False) -> float:
    """Modified inverted generational distance of set A to reference Z.

    Per reference point, the distance counts only the coordinates where the
    closest member of A falls short: d+(z) = min_a ||max(a - z, 0)||.  The
    aggregate is (1/|Z|) * sqrt(sum_i d+(z_i)^2); it is zero exactly when
    every reference point is weakly dominated by some member of A.
    With ``normalize`` both sets are rescaled by the reference ranges first.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] == 0:
        raise ValueError("empty approximation set")
    Zs = Z.Z if isinstance(Z, FrontReference) else np.atleast_2d(np.asarray(Z, dtype=float))
    if normalize:
        span = Zs.max(axis=0) - Zs.min(axis=0)
        span[span <= 0] = 1.0
        A = A / span
        Zs = Zs / span
    diff = np.maximum(A[:, None, :] - Zs[None, :, :], 0.0)  # (|A|, |Z|, q)
    d = np.sqrt((diff ** 2).sum(axis=2)).min(axis=0)        # (|Z|,)
    return float(np.sqrt(np.sum(d ** 2)) / Zs.shape[0])


def data_profile(histories: dict, tau: float, optima: dict) -> np.ndarray:
    """Fraction of instances solved to tolerance tau per evaluation budget.

    ``histories`` maps an instance key (problem, seed) to its best-feasible
    trace (one value per evaluation, NaN while infeasible); ``optima`` maps
    problem names to known optimal values.  An instance is solved at budget
    b when the relative error of its best value by b is at most tau.
    Returns an array of shape (max_budget, 2): evaluation count, fraction.
    """
    traces = []
    for key, trace in histories.items():
        problem = key[0] if isinstance(key, tuple) else key
        if problem not in optima:
            warnings.warn(f"no known optimum for {problem!r}: instance excluded")
            continue
        f_star = float(optima[problem])
        t = np.asarray(trace, dtype=float)
        denom = abs(f_star) if f_star != 0 else 1.0
        rel = (t - f_star) / denom
        rel = np.where(np.isnan(t), np.inf, rel)
        traces.append(rel <= tau)
    if not traces:
        return np.zeros((0, 2))
    n_b = max(len(t) for t in traces)
    solved = np.zeros((len(traces), n_b), dtype=bool)
    for i, t in enumerate(traces):
        solved[i, : len(t)] = t
        solved[i, len(t):] = t[-1] if len(t) else False
    frac = solved.mean(axis=0)
    return np.column_stack([np.arange(1, n_b + 1), frac])
