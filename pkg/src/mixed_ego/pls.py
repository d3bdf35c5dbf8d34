"""Partial least squares: projections, adaptive component count, embeddings.

The component count for a reduced-hyperparameter (KPLS) kriging model is
chosen by cross-validation: grow the number of components until the ratio
``R(d) = PRESS(d+1) / PRESS(d)`` of K-fold predicted-error sums of squares
reaches a threshold.  PLS weight matrices also serve as supervised linear
embeddings for optimizing high-dimensional problems in a low-dimensional
box, next to plain Gaussian random embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .space import Doe

__all__ = [
    "PlsProjection",
    "AdaptivePlsConfig",
    "EmbeddingSpec",
    "ExactFit",
    "fit_pls",
    "kfold_indices",
    "press",
    "wold_r",
    "adaptive_components",
    "kpls_kernel_params",
    "make_embedding",
]


class ExactFit(Exception):
    """Signals that PRESS is zero: stop growing components, the fit is exact."""


@dataclass(frozen=True)
class PlsProjection:
    """PLS1 weight matrix, one column per component."""

    weights: np.ndarray  # (d, h)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.ndim != 2:
            raise ValueError("weights must be 2D")
        norms = np.linalg.norm(w, axis=0)
        if (norms == 0).any():
            raise ValueError("zero weight column")

    @property
    def h(self) -> int:
        return self.weights.shape[1]


def fit_pls(X, y, h: int) -> PlsProjection:
    """NIPALS PLS1 weights of centered/scaled data; deterministic.

    Requires ``h <= min(d, n - 1)`` and a non-constant response.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if not 1 <= h <= min(d, n - 1):
        raise ValueError(f"h must lie in [1, min(d, n-1)] = [1, {min(d, n - 1)}]")
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Xk = (X - X.mean(axis=0)) / scale
    yk = y - y.mean()
    if np.allclose(yk, 0.0):
        raise ValueError("constant response: no covariance direction")
    W = np.zeros((d, h))
    for j in range(h):
        w = Xk.T @ yk
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            # residual response orthogonal to the data: pad with an unused axis
            w = np.zeros(d)
            w[int(np.argmin(np.abs(W).sum(axis=1)))] = 1.0
            nw = 1.0
        w = w / nw
        t = Xk @ w
        tt = float(t @ t)
        if tt < 1e-300:
            raise ValueError("degenerate score vector")
        p = Xk.T @ t / tt
        c = float(yk @ t) / tt
        Xk = Xk - np.outer(t, p)
        yk = yk - c * t
        W[:, j] = w
    return PlsProjection(W)


def kpls_kernel_params(projection: PlsProjection, theta_reduced) -> np.ndarray:
    """Expand reduced scales to the full space: theta_k = sum_j w_kj^2 theta_j.

    Applied over one-hot rows, the expansion induces per-level scales (a
    continuous-relaxation diagonal) from ``h`` hyperparameters.
    """
    th = np.atleast_1d(np.asarray(theta_reduced, dtype=float))
    if th.shape != (projection.h,):
        raise ValueError(f"need {projection.h} reduced scales")
    return (projection.weights ** 2) @ th


def kfold_indices(n: int, k: int, seed: int, y=None) -> list[np.ndarray]:
    """Deterministic K-fold split, stratified over sorted response blocks."""
    if not 2 <= k <= n:
        raise ValueError("need n >= K >= 2")
    rng = np.random.default_rng(seed)
    order = np.argsort(np.asarray(y, dtype=float), kind="stable") if y is not None \
        else rng.permutation(n)
    folds = [[] for _ in range(k)]
    for start in range(0, n, k):
        block = order[start:start + k]
        labels = rng.permutation(k)[: len(block)]
        for idx, lab in zip(block, labels):
            folds[lab].append(int(idx))
    return [np.array(sorted(f), dtype=int) for f in folds]


def press(doe: Doe, d: int, k: int, seed: int, *, output: int = 0,
          multistart: int = 2, maxiter: int = 60) -> float:
    """K-fold cross-validation PRESS of a d-component KPLS model.

    Sum over folds of the squared errors of models fitted without the fold;
    the fold split and the fold-model fits are deterministic per seed.
    """
    from .gp import FitOptions, fit_gp

    n = len(doe)
    y = doe.y[:, output]
    folds = kfold_indices(n, k, seed, y)
    if min(len(f) for f in folds) < 2:
        raise ValueError("each fold needs at least 2 points")
    total = 0.0
    for j, fold in enumerate(folds):
        train = np.setdiff1d(np.arange(n), fold)
        y_train = y[train]
        if np.ptp(y_train) == 0.0:
            # constant response: the interpolating model predicts the constant
            pred = np.full(fold.size, y_train[0])
        else:
            sub = Doe(doe.space, [doe.points[i] for i in train], y=doe.y[train])
            model = fit_gp(sub, options=FitOptions(multistart=multistart,
                                                   maxiter=maxiter,
                                                   seed=seed * 1000 + j),
                           output=output, n_components=d)
            pred = model.predict(doe.X[fold])
        total += float(np.sum((y[fold] - pred) ** 2))
    return total


def wold_r(press_d: float, press_d1: float) -> float:
    """Ratio PRESS(d+1) / PRESS(d); growth stops once it reaches the threshold."""
    if press_d < 0 or press_d1 < 0:
        raise ValueError("PRESS values must be nonnegative")
    if press_d == 0:
        raise ExactFit("PRESS is zero: exact fit reached")
    return press_d1 / press_d


@dataclass(frozen=True)
class AdaptivePlsConfig:
    """Bounds and stopping rule for the adaptive component count."""

    d_min: int = 1
    d_max: int = 5
    threshold: float = 0.95
    folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.d_min <= self.d_max:
            raise ValueError("need 1 <= d_min <= d_max")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.folds < 2:
            raise ValueError("need at least 2 folds")


def adaptive_components(doe: Doe, config: AdaptivePlsConfig, press_fn=press) -> int:
    """Component count by Wold's R: grow from d_min until R(d) >= threshold.

    Equivalent to a constant count when ``d_min == d_max``.
    """
    d = config.d_min
    if d == config.d_max:
        return d
    p_d = press_fn(doe, d, config.folds, config.seed)
    while d < config.d_max:
        p_d1 = press_fn(doe, d + 1, config.folds, config.seed)
        try:
            r = wold_r(p_d, p_d1)
        except ExactFit:
            return d
        if r >= config.threshold:
            return d
        d += 1
        p_d = p_d1
    return config.d_max


# ---------------------------------------------------------------------------
# linear embeddings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingSpec:
    """Linear embedding ``u = A x`` of a normalized [-1, 1]^n design cube.

    Rows of ``A`` have unit 1-norm so the forward image of the cube lies in
    [-1, 1]^d_e.  The back-map applies the pseudo-inverse and clips to the
    cube, which the caller denormalizes to the problem box.
    """

    A: np.ndarray  # (d_e, n)
    kind: str = "random-gaussian"

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        object.__setattr__(self, "A", A)
        if A.ndim != 2:
            raise ValueError("A must be 2D")
        if not np.isfinite(A).all():
            raise ValueError("A must be finite")

    @property
    def d_e(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def back_map(self, u: np.ndarray) -> np.ndarray:
        """Minimum-norm preimage of ``u``, clipped to the normalized cube."""
        x = np.linalg.pinv(self.A) @ np.asarray(u, dtype=float)
        return np.clip(x, -1.0, 1.0)

    def to_dict(self) -> dict:
        return {"A": self.A.tolist(), "kind": self.kind}

    @classmethod
    def from_dict(cls, d: dict) -> "EmbeddingSpec":
        return cls(np.asarray(d["A"]), d["kind"])


def make_embedding(kind: str, n: int, d_e: int, seed: int,
                   doe: Doe | None = None, output: int = 0) -> EmbeddingSpec:
    """Random-Gaussian or supervised-PLS transfer matrix.

    Random rows are scaled to unit 1-norm so the forward image of the
    normalized cube is guaranteed to stay in [-1, 1]^d_e; supervised rows
    are the (unit 2-norm) PLS weight vectors transposed.
    """
    if d_e >= n:
        raise ValueError("need d_e < n")
    if kind == "random-gaussian":
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((d_e, n))
        norms = np.abs(A).sum(axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        A = A / norms
    elif kind == "supervised-pls":
        if doe is None:
            raise ValueError("supervised embedding needs a DoE")
        lo, hi = doe.space.encoded_bounds()
        Xn = 2.0 * (doe.X - lo) / np.where(hi > lo, hi - lo, 1.0) - 1.0
        A = fit_pls(Xn, doe.y[:, output], d_e).weights.T
    else:
        raise ValueError(f"unknown embedding kind {kind!r}")
    return EmbeddingSpec(A, kind)
