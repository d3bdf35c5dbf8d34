"""Correlation kernels for mixed and hierarchical design spaces.

Three families are provided:

* the squared-exponential kernel for continuous and (relaxed) integer
  variables,
* a unified mixed-categorical family -- Gower-distance (GD), continuous
  relaxation (CR), exponential homoscedastic hypersphere (EHH) and
  homoscedastic hypersphere (HH) -- parameterized so that EHH reduces to
  CR when the hypersphere angles vanish, and CR with a tied diagonal
  reduces to GD,
* activity-aware kernels for decreed (hierarchical) variables built on an
  algebraic distance whose image under a circle embedding is Euclidean.

All functions are pure; matrices are assembled with numpy and validated
by Cholesky factorization with an escalating nugget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .space import CATEGORICAL, DECREED, DesignSpace, Doe

__all__ = [
    "NumericalError",
    "CategoricalKernelParams",
    "HierarchicalKernelParams",
    "KernelConfig",
    "n_free_params",
    "continuous_corr",
    "hypersphere_matrix",
    "phi_matrix",
    "level_corr_matrix",
    "categorical_corr",
    "alg_embed",
    "alg_distance",
    "decreed_categorical_corr",
    "assemble_correlation",
    "chol_with_nugget",
]

GD, CR, EHH, HH = "gd", "cr", "ehh", "hh"
_CAT_KINDS = (GD, CR, EHH, HH)

ALGEBRAIC, GOWER, IMPUTATION = "algebraic", "gower", "imputation"
_HIER_MODES = (ALGEBRAIC, GOWER, IMPUTATION)

DEFAULT_EPSILON = 1e-2
NUGGET_CAP = 1e-6


class NumericalError(RuntimeError):
    """Raised when a correlation matrix cannot be factorized."""


def n_free_params(kind: str, n_levels: int) -> int:
    """Hyperparameter count per categorical kind: 1 / L / L(L+1)/2."""
    if kind == GD:
        return 1
    if kind == CR:
        return n_levels
    if kind in (EHH, HH):
        return n_levels * (n_levels + 1) // 2
    raise ValueError(f"unknown categorical kernel kind {kind!r}")


@dataclass(frozen=True)
class CategoricalKernelParams:
    """Hyperparameters of one categorical variable's kernel.

    ``values`` is the packed free-parameter vector:

    * GD  -- ``[theta]``,
    * CR  -- the per-level diagonal ``[theta_1 .. theta_L]``,
    * EHH / HH -- diagonal followed by the strict-lower hypersphere angles
      in ``np.tril_indices(L, -1)`` order.  The HH correlation uses the
      angles only; its diagonal entries are carried for the uniform
      parameter layout.
    """

    kind: str
    n_levels: int
    values: np.ndarray
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if self.kind not in _CAT_KINDS:
            raise ValueError(f"unknown categorical kernel kind {self.kind!r}")
        v = np.atleast_1d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "values", v)
        if v.shape != (n_free_params(self.kind, self.n_levels),):
            raise ValueError(
                f"{self.kind} with {self.n_levels} levels needs "
                f"{n_free_params(self.kind, self.n_levels)} values, got {v.shape}")
        if (v < 0).any():
            raise ValueError("categorical hyperparameters must be >= 0")
        if self.kind in (EHH, HH) and (self.angles > np.pi).any():
            raise ValueError("hypersphere angles must lie in [0, pi]")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def diag(self) -> np.ndarray:
        if self.kind == GD:
            return np.full(self.n_levels, self.values[0] / 2.0)
        return self.values[: self.n_levels]

    @property
    def angles(self) -> np.ndarray:
        if self.kind in (EHH, HH):
            return self.values[self.n_levels:]
        return np.zeros(self.n_levels * (self.n_levels - 1) // 2)

    @classmethod
    def create(cls, kind: str, n_levels: int, theta=0.5, angles=0.0,
               epsilon: float = DEFAULT_EPSILON) -> "CategoricalKernelParams":
        """Params with a constant diagonal and constant angles."""
        if kind == GD:
            vals = np.array([theta], dtype=float)
        elif kind == CR:
            vals = np.full(n_levels, theta, dtype=float)
        else:
            n_ang = n_levels * (n_levels - 1) // 2
            vals = np.concatenate([np.full(n_levels, theta), np.full(n_ang, angles)])
        return cls(kind, n_levels, vals, epsilon)

    @classmethod
    def random(cls, kind: str, n_levels: int, rng: np.random.Generator,
               epsilon: float = DEFAULT_EPSILON) -> "CategoricalKernelParams":
        if kind == GD:
            vals = rng.uniform(0.05, 3.0, size=1)
        elif kind == CR:
            vals = rng.uniform(0.05, 3.0, size=n_levels)
        else:
            n_ang = n_levels * (n_levels - 1) // 2
            vals = np.concatenate([rng.uniform(0.05, 3.0, size=n_levels),
                                   rng.uniform(0.05, np.pi - 0.05, size=n_ang)])
        return cls(kind, n_levels, vals, epsilon)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_levels": self.n_levels,
                "values": self.values.tolist(), "epsilon": self.epsilon}

    @classmethod
    def from_dict(cls, d: dict) -> "CategoricalKernelParams":
        return cls(d["kind"], d["n_levels"], np.asarray(d["values"]), d["epsilon"])


@dataclass(frozen=True)
class HierarchicalKernelParams:
    """Hyperparameters of the activity-aware (decreed-variable) kernels.

    ``theta_dec`` holds one positive scale per decreed continuous/integer
    variable, in space order.  ``cat_mode`` selects the decreed-categorical
    treatment: the algebraic-distance kernel, its Gower-distance variant
    scaled by ``theta_cov``, or plain imputation.
    """

    theta_dec: np.ndarray
    theta_cov: float = 1.0
    cat_mode: str = ALGEBRAIC

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.theta_dec, dtype=float))
        object.__setattr__(self, "theta_dec", t)
        if (t <= 0).any():
            raise ValueError("decreed hyperparameters must be > 0")
        if self.theta_cov <= 0:
            raise ValueError("theta_cov must be > 0")
        if self.cat_mode not in _HIER_MODES:
            raise ValueError(f"unknown decreed-categorical mode {self.cat_mode!r}")

    def to_dict(self) -> dict:
        return {"theta_dec": self.theta_dec.tolist(), "theta_cov": self.theta_cov,
                "cat_mode": self.cat_mode}

    @classmethod
    def from_dict(cls, d: dict) -> "HierarchicalKernelParams":
        return cls(np.asarray(d["theta_dec"]), d["theta_cov"], d["cat_mode"])


@dataclass(frozen=True)
class KernelConfig:
    """Per-variable kernel assignment for one design space.

    ``theta`` has one entry per continuous/integer variable in space order
    (entries at decreed positions are superseded by ``hier.theta_dec`` when
    a hierarchical kernel is present).  ``categorical`` has one entry per
    categorical variable in space order.  ``nugget=None`` defers to the
    default ``1e-10 * n`` at assembly time.
    """

    theta: np.ndarray
    categorical: tuple = ()
    hier: HierarchicalKernelParams | None = None
    nugget: float | None = None

    def __post_init__(self):
        t = np.atleast_1d(np.asarray(self.theta, dtype=float))
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "categorical", tuple(self.categorical))
        if (t < 0).any():
            raise ValueError("theta must be >= 0")
        if self.nugget is not None and self.nugget <= 0:
            raise ValueError("nugget must be > 0")

    def nugget_for(self, n: int) -> float:
        return self.nugget if self.nugget is not None else 1e-10 * max(n, 1)

    def validate_for(self, space: DesignSpace):
        n_quant = space.n_continuous + space.n_integer
        if self.theta.shape != (n_quant,):
            raise ValueError(f"theta must have one entry per quantitative variable ({n_quant})")
        if len(self.categorical) != space.n_categorical:
            raise ValueError("need one categorical params entry per categorical variable")
        for i, p in zip(space.categorical_idx, self.categorical):
            if p.n_levels != space.variables[i].n_levels:
                raise ValueError(f"level count mismatch on {space.variables[i].name}")
        if self.hier is not None:
            n_dec_quant = sum(1 for i in space.decreed_idx
                              if space.variables[i].kind != CATEGORICAL)
            if self.hier.theta_dec.shape != (n_dec_quant,):
                raise ValueError("hier.theta_dec must cover each decreed quantitative variable")

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "categorical": [p.to_dict() for p in self.categorical],
            "hier": self.hier.to_dict() if self.hier else None,
            "nugget": self.nugget,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelConfig":
        return cls(
            np.asarray(d["theta"]),
            tuple(CategoricalKernelParams.from_dict(p) for p in d["categorical"]),
            HierarchicalKernelParams.from_dict(d["hier"]) if d.get("hier") else None,
            d.get("nugget"),
        )


def default_config(space: DesignSpace, kind: str = CR, theta: float = 0.1,
                   cat_theta: float = 0.5, hier_mode: str | None = None,
                   nugget: float | None = None) -> KernelConfig:
    """Config skeleton: constant theta, one categorical entry per variable."""
    n_quant = space.n_continuous + space.n_integer
    cats = tuple(CategoricalKernelParams.create(kind, space.variables[i].n_levels, cat_theta)
                 for i in space.categorical_idx)
    hier = None
    if hier_mode is not None:
        n_dec_quant = sum(1 for i in space.decreed_idx
                          if space.variables[i].kind != CATEGORICAL)
        hier = HierarchicalKernelParams(np.full(n_dec_quant, max(theta, 1e-6)),
                                        cat_mode=hier_mode)
    return KernelConfig(np.full(n_quant, theta), cats, hier, nugget)


# ---------------------------------------------------------------------------
# elementary kernels
# ---------------------------------------------------------------------------

def continuous_corr(x, x2, theta) -> float:
    """Squared-exponential correlation exp(-sum theta_k (x_k - x2_k)^2)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if x.shape != x2.shape or x.shape != theta.shape:
        raise ValueError("x, x2 and theta must have equal lengths")
    if (theta < 0).any():
        raise ValueError("theta must be >= 0")
    return float(np.exp(-np.sum(theta * (x - x2) ** 2)))


def hypersphere_matrix(angles, n_levels: int) -> np.ndarray:
    """Lower-triangular hypersphere factor C with unit-norm rows.

    ``angles`` is the strict-lower angle set in ``np.tril_indices`` order;
    ``C @ C.T`` is a correlation matrix (unit diagonal).
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    n_ang = n_levels * (n_levels - 1) // 2
    if angles.shape != (n_ang,):
        raise ValueError(f"expected {n_ang} angles for {n_levels} levels")
    if ((angles < 0) | (angles > np.pi)).any():
        raise ValueError("angles must lie in [0, pi]")
    th = np.zeros((n_levels, n_levels))
    th[np.tril_indices(n_levels, -1)] = angles
    C = np.zeros((n_levels, n_levels))
    C[0, 0] = 1.0
    for l in range(1, n_levels):
        sin_prod = 1.0
        for m in range(l):
            C[l, m] = np.cos(th[l, m]) * sin_prod
            sin_prod *= np.sin(th[l, m])
        C[l, l] = sin_prod
    return C


def phi_matrix(params: CategoricalKernelParams) -> np.ndarray:
    """Symmetric hyperparameter matrix Phi driving the exponential kernels.

    The diagonal carries the per-level scales; off-diagonals map the
    hypersphere correlation rho = C C^T through (log eps / 2) * (1 - rho),
    so they vanish exactly when rho = 1 (all angles zero, the continuous
    relaxation case) and are always <= 0.
    """
    L = params.n_levels
    C = hypersphere_matrix(params.angles, L)
    rho = C @ C.T
    phi = 0.5 * np.log(params.epsilon) * (1.0 - rho)
    np.fill_diagonal(phi, params.diag)
    return phi


def level_corr_matrix(params: CategoricalKernelParams) -> np.ndarray:
    """L x L level-correlation lookup table T with unit diagonal."""
    L = params.n_levels
    if params.kind == GD:
        T = np.full((L, L), np.exp(-params.values[0]))
    elif params.kind == CR:
        d = params.values
        T = np.exp(-(d[:, None] + d[None, :]))
    elif params.kind == EHH:
        phi = phi_matrix(params)
        d = np.diag(phi)
        T = np.exp(-(d[:, None] + d[None, :]) + 2.0 * phi)
    else:  # HH
        C = hypersphere_matrix(params.angles, L)
        T = C @ C.T
    np.fill_diagonal(T, 1.0)
    return T


def categorical_corr(r: int, s: int, params: CategoricalKernelParams) -> float:
    """Correlation between two levels of one categorical variable."""
    L = params.n_levels
    if not (0 <= r < L and 0 <= s < L):
        raise ValueError(f"levels must lie in [0, {L})")
    if r == s:
        return 1.0
    return float(level_corr_matrix(params)[r, s])


# ---------------------------------------------------------------------------
# hierarchical (decreed-variable) kernels
# ---------------------------------------------------------------------------

def alg_embed(x: float, active: bool) -> np.ndarray:
    """Circle embedding of a [0, 1] value; excluded entries map to the origin."""
    if not active:
        return np.zeros(2)
    if not 0.0 <= x <= 1.0:
        raise ValueError("active value must lie in [0, 1]")
    den = 1.0 + x * x
    return np.array([(1.0 - x * x) / den, 2.0 * x / den])


def alg_distance(u: float, v: float, u_active: bool, v_active: bool,
                 theta: float) -> float:
    """Algebraic distance between two possibly-excluded [0, 1] values.

    Equals ``theta`` times the Euclidean distance of the circle embeddings:
    0 when both are excluded, theta when exactly one is, and
    2 theta |u - v| / (sqrt(u^2+1) sqrt(v^2+1)) when both are included.
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    if not u_active and not v_active:
        return 0.0
    if u_active != v_active:
        return float(theta)
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("active values must lie in [0, 1]")
    return float(2.0 * theta * abs(u - v) / (np.sqrt(u * u + 1.0) * np.sqrt(v * v + 1.0)))


def decreed_categorical_corr(r: int, s: int, r_active: bool, s_active: bool,
                             params: CategoricalKernelParams,
                             mode: str = ALGEBRAIC, theta_cov: float = 1.0) -> float:
    """Correlation of a decreed categorical variable under the given mode.

    Algebraic mode follows the one-hot algebraic-distance kernel: the
    both-included case scales the level diagonal by sqrt(2), the
    one-included case integrates the full diagonal.  Gower mode uses the
    distances {0, sqrt(2) theta_cov, L/2 theta_cov}; imputation substitutes
    level 0 for excluded entries and applies the plain kernel.
    """
    if mode not in _HIER_MODES:
        raise ValueError(f"unknown decreed-categorical mode {mode!r}")
    L = params.n_levels
    if mode == IMPUTATION:
        r = r if r_active else 0
        s = s if s_active else 0
        return categorical_corr(r, s, params)
    if not r_active and not s_active:
        return 1.0
    if mode == GOWER:
        if r_active and s_active:
            return 1.0 if r == s else float(np.exp(-np.sqrt(2.0) * theta_cov))
        return float(np.exp(-0.5 * L * theta_cov))
    # algebraic
    d = np.asarray(phi_matrix(params).diagonal())
    if r_active and s_active:
        if not (0 <= r < L and 0 <= s < L):
            raise ValueError(f"levels must lie in [0, {L})")
        if r == s:
            return 1.0
        return float(np.exp(-np.sqrt(2.0) * (d[r] + d[s])))
    return float(np.exp(-np.sum(d)))


# ---------------------------------------------------------------------------
# matrix assembly
# ---------------------------------------------------------------------------

def _norm_quant(v: np.ndarray, lower: float, upper: float) -> np.ndarray:
    span = upper - lower
    if span <= 0:
        return np.zeros_like(v)
    return (v - lower) / span


def _embed_column(u: np.ndarray, act: np.ndarray) -> np.ndarray:
    """Vectorized circle embedding, (n, 2); excluded rows at the origin."""
    e = np.zeros((u.shape[0], 2))
    den = 1.0 + u * u
    e[:, 0] = np.where(act, (1.0 - u * u) / den, 0.0)
    e[:, 1] = np.where(act, 2.0 * u / den, 0.0)
    return e


def pairwise_correlation(space: DesignSpace, config: KernelConfig,
                         V1: np.ndarray, A1: np.ndarray,
                         V2: np.ndarray | None = None,
                         A2: np.ndarray | None = None) -> np.ndarray:
    """Correlation matrix between two point sets (no nugget).

    ``V*`` are per-variable value matrices, ``A*`` the matching activity
    masks.  Quantitative values are normalized to [0, 1] by their variable
    bounds before distances are taken, so theta is scale-free.
    """
    config.validate_for(space)
    sym = V2 is None
    if sym:
        V2, A2 = V1, A1
    n1, n2 = V1.shape[0], V2.shape[0]
    log_r = np.zeros((n1, n2))
    factor = np.ones((n1, n2))

    quant_pos = 0
    dec_quant_pos = 0
    cat_pos = 0
    for i, var in enumerate(space.variables):
        if var.kind == CATEGORICAL:
            params = config.categorical[cat_pos]
            cat_pos += 1
            l1 = V1[:, i].astype(int)
            l2 = V2[:, i].astype(int)
            if var.role == DECREED and config.hier is not None:
                factor *= _decreed_cat_factor(l1, A1[:, i], l2, A2[:, i],
                                              params, config.hier)
            else:
                T = level_corr_matrix(params)
                factor *= T[l1[:, None], l2[None, :]]
        else:
            u1 = _norm_quant(V1[:, i], var.lower, var.upper)
            u2 = _norm_quant(V2[:, i], var.lower, var.upper)
            if var.role == DECREED and config.hier is not None:
                th = config.hier.theta_dec[dec_quant_pos]
                dec_quant_pos += 1
                quant_pos += 1
                e1 = _embed_column(u1, A1[:, i])
                e2 = _embed_column(u2, A2[:, i])
                diff = e1[:, None, :] - e2[None, :, :]
                d2 = np.einsum("ijk,ijk->ij", diff, diff)
                log_r -= (th * th) * d2
            else:
                # decreed variables without a hierarchical kernel fall back
                # to the imputation path: plain kernel on imputed values
                th = config.theta[quant_pos]
                quant_pos += 1
                d = u1[:, None] - u2[None, :]
                log_r -= th * d * d
    R = np.exp(log_r) * factor
    if sym:
        R = 0.5 * (R + R.T)
    return R


def _decreed_cat_factor(l1, a1, l2, a2, params, hier) -> np.ndarray:
    mode = hier.cat_mode
    if mode == IMPUTATION:
        T = level_corr_matrix(params)
        l1 = np.where(a1, l1, 0)
        l2 = np.where(a2, l2, 0)
        return T[l1[:, None], l2[None, :]]
    both = a1[:, None] & a2[None, :]
    one = a1[:, None] ^ a2[None, :]
    if mode == GOWER:
        v_diff = np.exp(-np.sqrt(2.0) * hier.theta_cov)
        v_one = np.exp(-0.5 * params.n_levels * hier.theta_cov)
        T_inc = np.full((params.n_levels, params.n_levels), v_diff)
        np.fill_diagonal(T_inc, 1.0)
    else:
        d = phi_matrix(params).diagonal().copy()
        T_inc = np.exp(-np.sqrt(2.0) * (d[:, None] + d[None, :]))
        np.fill_diagonal(T_inc, 1.0)
        v_one = np.exp(-np.sum(d))
    F = np.ones((l1.shape[0], l2.shape[0]))
    F = np.where(both, T_inc[l1[:, None], l2[None, :]], F)
    F = np.where(one, v_one, F)
    return F


def chol_with_nugget(R0: np.ndarray, nugget: float):
    """Cholesky factor of R0 + nugget*I, doubling the nugget on failure.

    Escalation stops at ``NUGGET_CAP``; beyond it a :class:`NumericalError`
    carrying a condition estimate is raised.
    """
    ng = nugget
    while True:
        try:
            L = sla.cholesky(R0 + ng * np.eye(R0.shape[0]), lower=True)
            return L, ng
        except sla.LinAlgError:
            ng *= 2.0
            if ng > NUGGET_CAP:
                cond = np.linalg.cond(R0 + np.eye(R0.shape[0]) * nugget)
                raise NumericalError(
                    f"correlation matrix not SPD after nugget escalation "
                    f"(cond ~ {cond:.3e}, nugget cap {NUGGET_CAP})") from None


def assemble_correlation(doe: Doe, config: KernelConfig) -> np.ndarray:
    """n x n correlation of a DoE: per-variable product, nugget on the diagonal.

    The result is verified symmetric positive definite (a Cholesky
    factorization must succeed, escalating the nugget up to the cap).
    """
    V = doe.values_matrix()
    A = doe.activity_matrix()
    R0 = pairwise_correlation(doe.space, config, V, A)
    _, ng = chol_with_nugget(R0, config.nugget_for(len(doe)))
    return R0 + ng * np.eye(R0.shape[0])
