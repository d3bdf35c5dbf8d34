"""Gaussian-process surrogate: likelihood, analytic gradient, fit, predict.

The model is ordinary kriging with a constant trend.  Writing ``R`` for the
kernel correlation matrix of the sample, the trend coefficient and process
variance are profiled out analytically,

    beta   = (1' R^-1 y) / (1' R^-1 1)
    sigma2 = (y - beta)' R^-1 (y - beta) / n,

and the concentrated log-likelihood (up to an additive constant) is
``-(n log sigma2 + log det R) / 2``.

The likelihood derivative with respect to a hyperparameter ``t`` is

    dL/dt = Tr((R^-1 w w' R^-1 - R^-1) dR/dt) / 2,

with ``w`` the standardized residual ``(y - beta) / sigma``.  For a
quantitative hyperparameter ``dR/dt = -d_t o R`` (Hadamard) where ``d_t``
holds the pairwise squared distances of that coordinate; for a categorical
hyperparameter, taken as the correlation value of one level pair,
``dR/dt = (1/t) A o R`` with ``A`` the level-incidence mask.  Hyperparameter
estimation itself is derivative-free (multistart COBYLA): the categorical
directions have vanishing second derivatives, so gradient/Hessian methods
are not used for fitting.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize

from .base import ParamsMixin
from .space import CATEGORICAL, DECREED, DesignSpace, Doe, MixedPoint, continuous_var
from .kernels import (
    ALGEBRAIC, CR, GOWER, CategoricalKernelParams,
    HierarchicalKernelParams, KernelConfig, NumericalError, chol_with_nugget,
    default_config, pairwise_correlation, _embed_column, _norm_quant,
)

__all__ = [
    "Prediction",
    "FitOptions",
    "FitError",
    "GpModel",
    "LikelihoodModel",
    "log_likelihood",
    "likelihood_grad",
    "fit_gp",
    "MixedGaussianProcess",
]

LOG10_THETA_BOUNDS = (-6.0, 2.0)
ANGLE_MARGIN = 1e-6
_SIGMA2_FLOOR = 1e-300


class FitError(RuntimeError):
    """Raised when no hyperparameter start yields a usable model."""


@dataclass(frozen=True)
class Prediction:
    mean: float
    variance: float


# ---------------------------------------------------------------------------
# likelihood in the differentiable parameterization
# ---------------------------------------------------------------------------

class LikelihoodModel:
    """Concentrated likelihood as a function of differentiable hyperparameters.

    The free vector concatenates, variable by variable:

    * quantitative variables: the kernel scale ``theta`` (one entry),
    * categorical variables: the level-pair correlations ``tau_ab`` for
      a > b in ``np.tril_indices`` order; activity-aware categorical
      variables additionally carry the one-included correlation value.

    The nugget used at the reference parameters is frozen, so the map from
    vector to likelihood is smooth and central finite differences of
    :meth:`value` converge to :meth:`gradient`.
    """

    def __init__(self, doe: Doe, config: KernelConfig, output: int = 0):
        config.validate_for(doe.space)
        self.space = doe.space
        self.config = config
        self.n = len(doe)
        if doe.y is None:
            raise ValueError("DoE carries no outputs")
        self.y = doe.y[:, output].astype(float)
        V = doe.values_matrix()
        A = doe.activity_matrix()
        self._terms: list[tuple] = []
        self._labels: list[str] = []
        x0: list[float] = []

        quant_pos = 0
        dec_pos = 0
        cat_pos = 0
        for i, var in enumerate(self.space.variables):
            hier_var = var.role == DECREED and config.hier is not None
            if var.kind != CATEGORICAL:
                u = _norm_quant(V[:, i], var.lower, var.upper)
                if hier_var:
                    e = _embed_column(u, A[:, i])
                    diff = e[:, None, :] - e[None, :, :]
                    d2 = np.einsum("ijk,ijk->ij", diff, diff)
                    self._terms.append(("theta_dec", d2))
                    x0.append(float(config.hier.theta_dec[dec_pos]))
                    dec_pos += 1
                    quant_pos += 1
                else:
                    d = u[:, None] - u[None, :]
                    self._terms.append(("theta", d * d))
                    x0.append(float(config.theta[quant_pos]))
                    quant_pos += 1
                self._labels.append(f"theta[{var.name}]")
            else:
                params = config.categorical[cat_pos]
                cat_pos += 1
                L = params.n_levels
                lev = V[:, i].astype(int)
                a, b = np.tril_indices(L, -1)
                if hier_var and config.hier.cat_mode in (ALGEBRAIC, GOWER):
                    from .kernels import decreed_categorical_corr
                    act = A[:, i]
                    both = act[:, None] & act[None, :]
                    one = act[:, None] ^ act[None, :]
                    taus = [decreed_categorical_corr(int(ai), int(bi), True, True,
                                                     params, config.hier.cat_mode,
                                                     config.hier.theta_cov)
                            for ai, bi in zip(a, b)]
                    tau_one = decreed_categorical_corr(0, 0, True, False, params,
                                                       config.hier.cat_mode,
                                                       config.hier.theta_cov)
                    self._terms.append(("tau_set", lev, L, both))
                    x0.extend(taus)
                    self._labels.extend(f"tau[{var.name}:{ai},{bi}]" for ai, bi in zip(a, b))
                    self._terms.append(("tau_one", one))
                    x0.append(float(tau_one))
                    self._labels.append(f"tau_one[{var.name}]")
                else:
                    from .kernels import level_corr_matrix
                    lev_eff = np.where(A[:, i], lev, 0) if var.role == DECREED else lev
                    T = level_corr_matrix(params)
                    self._terms.append(("tau_set", lev_eff, L, None))
                    x0.extend(float(T[ai, bi]) for ai, bi in zip(a, b))
                    self._labels.extend(f"tau[{var.name}:{ai},{bi}]" for ai, bi in zip(a, b))
        self.x0 = np.array(x0)
        # freeze the nugget chosen at the reference parameters
        R0 = self.correlation(self.x0)
        _, self.nugget = chol_with_nugget(R0, config.nugget_for(self.n))

    @property
    def labels(self) -> list[str]:
        return list(self._labels)

    def correlation(self, vec: np.ndarray) -> np.ndarray:
        """Correlation matrix (no nugget) at the given parameter vector."""
        vec = np.asarray(vec, dtype=float)
        n = self.n
        log_r = np.zeros((n, n))
        factor = np.ones((n, n))
        pos = 0
        for term in self._terms:
            tag = term[0]
            if tag == "theta":
                log_r -= vec[pos] * term[1]
                pos += 1
            elif tag == "theta_dec":
                log_r -= vec[pos] ** 2 * term[1]
                pos += 1
            elif tag == "tau_set":
                lev, L, both = term[1], term[2], term[3]
                n_tau = L * (L - 1) // 2
                T = np.eye(L)
                a, b = np.tril_indices(L, -1)
                T[a, b] = vec[pos:pos + n_tau]
                T[b, a] = vec[pos:pos + n_tau]
                F = T[lev[:, None], lev[None, :]]
                if both is not None:
                    F = np.where(both, F, 1.0)
                factor *= F
                pos += n_tau
            elif tag == "tau_one":
                one = term[1]
                factor *= np.where(one, vec[pos], 1.0)
                pos += 1
        R = np.exp(log_r) * factor
        return 0.5 * (R + R.T)

    def _solve_parts(self, vec):
        R0 = self.correlation(vec)
        R = R0 + self.nugget * np.eye(self.n)
        try:
            L = sla.cholesky(R, lower=True)
        except sla.LinAlgError as exc:
            raise NumericalError("correlation matrix not SPD at frozen nugget") from exc
        cho = (L, True)
        ones = np.ones(self.n)
        Ri_y = sla.cho_solve(cho, self.y)
        Ri_1 = sla.cho_solve(cho, ones)
        beta = float(ones @ Ri_y / (ones @ Ri_1))
        resid = self.y - beta
        Ri_r = Ri_y - beta * Ri_1
        sigma2 = float(resid @ Ri_r) / self.n
        return R0, L, cho, beta, resid, Ri_r, sigma2

    def value(self, vec: np.ndarray) -> float:
        """Concentrated log-likelihood, up to an additive constant."""
        _, L, _, _, _, _, sigma2 = self._solve_parts(vec)
        log_det = 2.0 * np.sum(np.log(np.diag(L)))
        return float(-0.5 * (self.n * np.log(max(sigma2, _SIGMA2_FLOOR)) + log_det))

    def gradient(self, vec: np.ndarray) -> np.ndarray:
        """Analytic dL/d(vec); the trace formula with the two dR/dt forms."""
        vec = np.asarray(vec, dtype=float)
        R0, L, cho, beta, resid, Ri_r, sigma2 = self._solve_parts(vec)
        Rinv = sla.cho_solve(cho, np.eye(self.n))
        if sigma2 > 1e-15 * max(1.0, float(self.y @ self.y) / self.n):
            a = Ri_r / np.sqrt(sigma2)
            B = np.outer(a, a) - Rinv
        else:
            B = -Rinv  # constant output: the data-fit term vanishes
        W = B * R0
        grad = np.zeros_like(vec)
        pos = 0
        for term in self._terms:
            tag = term[0]
            if tag == "theta":
                grad[pos] = -0.5 * np.sum(W * term[1])
                pos += 1
            elif tag == "theta_dec":
                grad[pos] = -0.5 * np.sum(W * (2.0 * vec[pos] * term[1]))
                pos += 1
            elif tag == "tau_set":
                lev, Lv, both = term[1], term[2], term[3]
                n_tau = Lv * (Lv - 1) // 2
                Wm = W if both is None else np.where(both, W, 0.0)
                S = np.zeros((Lv, Lv))
                np.add.at(S, (np.broadcast_to(lev[:, None], Wm.shape),
                              np.broadcast_to(lev[None, :], Wm.shape)), Wm)
                a, b = np.tril_indices(Lv, -1)
                taus = vec[pos:pos + n_tau]
                if (taus == 0).any():
                    raise NumericalError(
                        "zero categorical correlation: derivative only exists "
                        "as a one-sided limit")
                grad[pos:pos + n_tau] = 0.5 * (S[a, b] + S[b, a]) / taus
                pos += n_tau
            elif tag == "tau_one":
                one = term[1]
                if vec[pos] == 0:
                    raise NumericalError(
                        "zero categorical correlation: derivative only exists "
                        "as a one-sided limit")
                grad[pos] = 0.5 * np.sum(np.where(one, W, 0.0)) / vec[pos]
                pos += 1
        return grad


def log_likelihood(doe: Doe, config: KernelConfig, output: int = 0) -> float:
    """Concentrated log-likelihood of a DoE under the given hyperparameters."""
    m = LikelihoodModel(doe, config, output)
    return m.value(m.x0)


def likelihood_grad(doe: Doe, config: KernelConfig, output: int = 0) -> np.ndarray:
    """Analytic likelihood gradient at the config's hyperparameters.

    Components follow the :class:`LikelihoodModel` layout (``labels``):
    quantitative scales first per variable order, categorical level-pair
    correlations after.
    """
    m = LikelihoodModel(doe, config, output)
    return m.gradient(m.x0)


# ---------------------------------------------------------------------------
# fitting
# ---------------------------------------------------------------------------

@dataclass
class FitOptions:
    """Multistart derivative-free likelihood maximization settings."""

    multistart: int = 10
    maxiter: int = 150
    seed: int = 0
    warm: np.ndarray | None = None  # extra packed start, e.g. the previous fit


class _Packing:
    """Maps a flat native-parameter vector to a KernelConfig and back.

    Quantitative scales are searched in log10; hypersphere angles in
    (0, pi).  For activity-aware categorical variables only the level
    diagonal is free (the kernel ignores the angles).  Random multistarts
    draw from the upper part of the log range: scales below ~1e-2 flatten
    the likelihood into a numerically singular plateau.
    """

    def __init__(self, space: DesignSpace, template: KernelConfig):
        template.validate_for(space)
        self.space = space
        self.template = template
        self.entries: list[tuple] = []
        lo, hi = [], []
        start_lo = []
        lt0, lt1 = LOG10_THETA_BOUNDS

        def add(tag, ref, size, low, high):
            self.entries.append((tag, ref, size))
            lo.extend([low] * size)
            hi.extend([high] * size)
            start_lo.extend([(-2.0 if low == lt0 else low)] * size)

        quant_pos = 0
        dec_pos = 0
        cat_pos = 0
        for i, var in enumerate(space.variables):
            hier_var = var.role == DECREED and template.hier is not None
            if var.kind != CATEGORICAL:
                if hier_var:
                    add("log_theta_dec", dec_pos, 1, lt0, lt1)
                    dec_pos += 1
                else:
                    add("log_theta", quant_pos, 1, lt0, lt1)
                quant_pos += 1
            else:
                params = template.categorical[cat_pos]
                L = params.n_levels
                n_ang = L * (L - 1) // 2
                algeb = hier_var and template.hier.cat_mode == ALGEBRAIC
                if hier_var and template.hier.cat_mode == GOWER:
                    pass  # governed by theta_cov below
                elif params.kind == "gd":
                    add("cat_log", cat_pos, 1, lt0, lt1)
                elif params.kind == "cr" or algeb:
                    # the decreed algebraic kernel reads only the diagonal
                    add("cat_log_diag", cat_pos, L, lt0, lt1)
                elif params.kind == "ehh":
                    add("cat_log_diag", cat_pos, L, lt0, lt1)
                    add("cat_angle", cat_pos, n_ang, ANGLE_MARGIN, np.pi - ANGLE_MARGIN)
                else:  # hh
                    add("cat_angle", cat_pos, n_ang, ANGLE_MARGIN, np.pi - ANGLE_MARGIN)
                cat_pos += 1
        if template.hier is not None and template.hier.cat_mode == GOWER and any(
                space.variables[i].kind == CATEGORICAL for i in space.decreed_idx):
            add("log_theta_cov", None, 1, lt0, lt1)
        self.lower = np.array(lo)
        self.upper = np.array(hi)
        self.start_lower = np.array(start_lo)

    @property
    def size(self) -> int:
        return self.lower.size

    def pack(self) -> np.ndarray:
        """Template parameters as a flat vector."""
        out = []
        t = self.template
        for tag, ref, size in self.entries:
            if tag == "log_theta":
                out.append(np.log10(max(t.theta[ref], 1e-6)))
            elif tag == "log_theta_dec":
                out.append(np.log10(max(t.hier.theta_dec[ref], 1e-6)))
            elif tag == "log_theta_cov":
                out.append(np.log10(max(t.hier.theta_cov, 1e-6)))
            elif tag == "cat_log":
                out.append(np.log10(max(t.categorical[ref].values[0], 1e-6)))
            elif tag == "cat_log_diag":
                out.extend(np.log10(np.maximum(
                    t.categorical[ref].values[:size], 1e-6)))
            elif tag == "cat_angle":
                L = t.categorical[ref].n_levels
                ang = t.categorical[ref].values[L:L + size]
                out.extend(np.clip(ang, ANGLE_MARGIN, np.pi - ANGLE_MARGIN))
        return np.array(out)

    def unpack(self, vec: np.ndarray) -> KernelConfig:
        t = self.template
        theta = t.theta.copy()
        theta_dec = t.hier.theta_dec.copy() if t.hier is not None else None
        theta_cov = t.hier.theta_cov if t.hier is not None else None
        cat_vals = [p.values.copy() for p in t.categorical]
        pos = 0
        for tag, ref, size in self.entries:
            chunk = vec[pos:pos + size]
            pos += size
            if tag == "log_theta":
                theta[ref] = 10.0 ** chunk[0]
            elif tag == "log_theta_dec":
                theta_dec[ref] = 10.0 ** chunk[0]
            elif tag == "log_theta_cov":
                theta_cov = 10.0 ** chunk[0]
            elif tag == "cat_log":
                cat_vals[ref][0] = 10.0 ** chunk[0]
            elif tag == "cat_log_diag":
                cat_vals[ref][:size] = 10.0 ** chunk
            elif tag == "cat_angle":
                L = t.categorical[ref].n_levels
                cat_vals[ref][L:L + size] = np.clip(chunk, 0.0, np.pi)
        cats = tuple(replace(p, values=v) for p, v in zip(t.categorical, cat_vals))
        hier = None
        if t.hier is not None:
            hier = HierarchicalKernelParams(theta_dec, theta_cov, t.hier.cat_mode)
        return KernelConfig(theta, cats, hier, t.nugget)


@dataclass
class GpModel:
    """Fitted surrogate: hyperparameters, trend, variance, Cholesky factor.

    Outputs are standardized internally (``y_mean``, ``y_std``); ``beta`` is
    the trend in raw units, ``sigma2`` the process variance of the
    standardized outputs.
    """

    space: DesignSpace
    config: KernelConfig
    V: np.ndarray
    A: np.ndarray
    y: np.ndarray
    y_mean: float
    y_std: float
    beta: float
    sigma2: float
    chol: np.ndarray
    alpha: np.ndarray
    Ri_1: np.ndarray
    one_Ri_1: float
    nugget: float
    log_likelihood: float

    def _as_va(self, X) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(X, MixedPoint):
            X = [X]
        if isinstance(X, np.ndarray) and X.ndim == 1:
            X = X[None, :]
        pts = []
        for row in X:
            if isinstance(row, MixedPoint):
                self.space.validate_point(row)
                pts.append(self.space.impute(row))
            else:
                pts.append(self.space.decode(np.asarray(row, dtype=float)))
        V = np.array([[float(p.values[i]) for i in range(self.space.n_vars)] for p in pts])
        A = np.array([self.space.active_mask(p.values) for p in pts])
        return V, A

    def predict_arrays(self, V2: np.ndarray, A2: np.ndarray):
        """Vectorized mean and variance (raw units) for values/activity arrays."""
        r = pairwise_correlation(self.space, self.config, V2, A2, self.V, self.A)
        mean = self.beta + self.y_std * (r @ self.alpha)
        cho = (self.chol, True)
        Ri_rT = sla.cho_solve(cho, r.T)
        quad = np.einsum("ij,ji->i", r, Ri_rT)
        u = 1.0 - r @ self.Ri_1
        var = self.y_std ** 2 * self.sigma2 * (1.0 - quad + u * u / self.one_Ri_1)
        return mean, np.maximum(var, 0.0)

    def predict(self, X, return_std: bool = False):
        """Mean (and optionally standard deviation) at points or vectors."""
        V2, A2 = self._as_va(X)
        mean, var = self.predict_arrays(V2, A2)
        if return_std:
            return mean, np.sqrt(var)
        return mean

    def predict_point(self, point: MixedPoint) -> Prediction:
        mean, var = self.predict_arrays(*self._as_va(point))
        return Prediction(float(mean[0]), float(var[0]))

    def export(self) -> dict:
        """Reproducible description: hyperparameters, trend, sample hash."""
        import hashlib
        key = hashlib.sha256(np.ascontiguousarray(self.V).tobytes()
                             + np.ascontiguousarray(self.y).tobytes()).hexdigest()
        return {
            "space": self.space.to_dict(),
            "config": self.config.to_dict(),
            "beta": self.beta,
            "sigma2": self.sigma2,
            "nugget": self.nugget,
            "doe_sha256": key,
            "log_likelihood": self.log_likelihood,
        }


def model_from_export(export: dict, doe: Doe, output: int = 0) -> GpModel:
    """Rebuild a fitted model from its export and the original sample.

    The sample is checked against the exported hash, so reconstructed
    predictions reproduce the exporting model's exactly.
    """
    import hashlib
    V = doe.values_matrix()
    y = doe.y[:, output].astype(float)
    key = hashlib.sha256(np.ascontiguousarray(V).tobytes()
                         + np.ascontiguousarray(y).tobytes()).hexdigest()
    if key != export["doe_sha256"]:
        raise ValueError("sample does not match the exported model's DoE hash")
    config = KernelConfig.from_dict(export["config"])
    return _model_from_config(doe, config, output)


def _model_from_config(doe: Doe, config: KernelConfig, output: int) -> GpModel:
    V = doe.values_matrix()
    A = doe.activity_matrix()
    y = doe.y[:, output].astype(float)
    n = len(doe)
    y_mean = float(y.mean())
    y_std = float(y.std())
    if y_std <= 0:
        y_std = 1.0
    ys = (y - y_mean) / y_std
    R0 = pairwise_correlation(doe.space, config, V, A)
    L, ng = chol_with_nugget(R0, config.nugget_for(n))
    cho = (L, True)
    ones = np.ones(n)
    Ri_y = sla.cho_solve(cho, ys)
    Ri_1 = sla.cho_solve(cho, ones)
    one_Ri_1 = float(ones @ Ri_1)
    beta_std = float(ones @ Ri_y / one_Ri_1)
    resid = ys - beta_std
    Ri_r = Ri_y - beta_std * Ri_1
    sigma2 = float(resid @ Ri_r) / n
    sigma2 = max(sigma2, 1e-12)
    log_det = 2.0 * np.sum(np.log(np.diag(L)))
    ll = float(-0.5 * (n * np.log(max(sigma2, _SIGMA2_FLOOR)) + log_det))
    beta = y_mean + y_std * beta_std
    return GpModel(doe.space, config, V, A, y, y_mean, y_std, beta, sigma2, L,
                   Ri_r, Ri_1, one_Ri_1, ng, ll)


def fit_gp(doe: Doe, config: KernelConfig | None = None,
           options: FitOptions | None = None, output: int = 0,
           n_components: int | None = None) -> GpModel:
    """Maximum-likelihood fit by multistart COBYLA within the search bounds.

    ``config`` acts as a structural template (kernel kinds, hierarchy mode,
    nugget); its parameter values seed the first start.  With
    ``n_components`` the hyperparameters are reduced to that many scales
    through a PLS projection of the relaxed sample (KPLS); the expanded
    per-dimension scales populate a continuous-relaxation config.
    Deterministic for a given ``options.seed``; ties keep the lowest start.
    """
    if len(doe) < 2:
        raise ValueError("fit needs at least 2 points")
    options = options or FitOptions()
    if config is None:
        config = default_config(doe.space, kind=CR)
    config.validate_for(doe.space)

    if n_components is not None:
        return _fit_kpls(doe, config, options, output, n_components)

    packing = _Packing(doe.space, config)
    rng = np.random.default_rng(options.seed)

    def objective(vec):
        try:
            return -log_likelihood(doe, packing.unpack(vec), output)
        except NumericalError:
            return 1e12

    starts = [packing.pack()]
    if options.warm is not None and options.warm.shape == (packing.size,):
        starts.append(np.clip(options.warm, packing.lower, packing.upper))
    while len(starts) < max(options.multistart, 1):
        starts.append(rng.uniform(packing.start_lower, packing.upper))

    best_vec, best_val = None, np.inf
    for x0 in starts:
        if packing.size == 0:
            best_vec, best_val = x0, objective(x0)
            break
        res = minimize(objective, x0, method="COBYLA",
                       bounds=list(zip(packing.lower, packing.upper)),
                       options={"maxiter": options.maxiter, "rhobeg": 1.0})
        val = res.fun if np.isfinite(res.fun) else 1e12
        if val < best_val:
            best_vec, best_val = np.clip(res.x, packing.lower, packing.upper), val
    if best_vec is None or best_val >= 1e12:
        raise FitError("no start produced a factorizable correlation matrix")
    model = _model_from_config(doe, packing.unpack(best_vec), output)
    model.fit_vector_ = best_vec  # warm-start hook for sequential refits
    return model


def _fit_kpls(doe: Doe, config: KernelConfig, options: FitOptions,
              output: int, h: int) -> GpModel:
    from .pls import fit_pls, kpls_kernel_params

    if config.hier is not None:
        raise ValueError("KPLS reduction does not combine with hierarchical kernels")
    proj = fit_pls(doe.X, doe.y[:, output], h)
    rng = np.random.default_rng(options.seed)
    lo = np.full(h, LOG10_THETA_BOUNDS[0])
    hi = np.full(h, LOG10_THETA_BOUNDS[1])

    def expand(vec):
        theta_full = kpls_kernel_params(proj, 10.0 ** np.asarray(vec))
        return _config_from_relaxed_theta(doe.space, theta_full, config.nugget)

    def objective(vec):
        try:
            return -log_likelihood(doe, expand(vec), output)
        except NumericalError:
            return 1e12

    starts = [np.full(h, -1.0)]
    if options.warm is not None and options.warm.shape == (h,):
        starts.append(np.clip(options.warm, lo, hi))
    while len(starts) < max(options.multistart, 1):
        starts.append(rng.uniform(-2.0, hi))
    best_vec, best_val = None, np.inf
    for x0 in starts:
        res = minimize(objective, x0, method="COBYLA",
                       bounds=list(zip(lo, hi)),
                       options={"maxiter": options.maxiter, "rhobeg": 1.0})
        val = res.fun if np.isfinite(res.fun) else 1e12
        if val < best_val:
            best_vec, best_val = np.clip(res.x, lo, hi), val
    if best_vec is None or best_val >= 1e12:
        raise FitError("no start produced a factorizable correlation matrix")
    model = _model_from_config(doe, expand(best_vec), output)
    model.fit_vector_ = best_vec
    model.pls_projection_ = proj
    return model


def _config_from_relaxed_theta(space: DesignSpace, theta_full: np.ndarray,
                               nugget: float | None) -> KernelConfig:
    """Per-relaxed-dimension scales -> CR config (one-hot blocks as diagonals)."""
    n_quant = space.n_continuous + space.n_integer
    theta = np.zeros(n_quant)
    cats = []
    quant_pos = 0
    for i, var in enumerate(space.variables):
        sl = space.var_slice(i)
        if var.kind == CATEGORICAL:
            cats.append(CategoricalKernelParams(
                CR, var.n_levels, np.maximum(theta_full[sl], 0.0)))
        else:
            theta[quant_pos] = max(theta_full[sl.start], 0.0)
            quant_pos += 1
    return KernelConfig(theta, tuple(cats), None, nugget)


# ---------------------------------------------------------------------------
# estimator facade
# ---------------------------------------------------------------------------

class MixedGaussianProcess(ParamsMixin):
    """Kriging estimator with the familiar fit/predict surface.

    ``X`` may be a list of :class:`MixedPoint`, an array of relaxed vectors
    for a given ``space``, or (space omitted) a plain 2D array of continuous
    features, in which case a box space is inferred from the data range.
    """

    def __init__(self, space: DesignSpace | None = None, kernel: str = CR,
                 hier_mode: str | None = None, n_components: int | None = None,
                 nugget: float | None = None, multistart: int = 10,
                 maxiter: int = 150, seed: int = 0):
        self.space = space
        self.kernel = kernel
        self.hier_mode = hier_mode
        self.n_components = n_components
        self.nugget = nugget
        self.multistart = multistart
        self.maxiter = maxiter
        self.seed = seed

    def _build_space(self, X: np.ndarray) -> DesignSpace:
        X = np.asarray(X, dtype=float)
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = np.maximum(0.05 * (hi - lo), 1e-6)
        return DesignSpace([continuous_var(f"x{j}", lo[j] - pad[j], hi[j] + pad[j])
                            for j in range(X.shape[1])])

    def fit(self, X, y):
        if isinstance(X, Doe):
            doe = X
            space = doe.space
        else:
            space = self.space
            y = np.asarray(y, dtype=float)
            if space is None:
                X = np.asarray(X, dtype=float)
                space = self._build_space(X)
            if isinstance(X, np.ndarray):
                pts = [space.decode(row) for row in np.atleast_2d(np.asarray(X, dtype=float))]
            else:
                pts = [space.impute(p) for p in X]
            doe = Doe(space, pts, y=y)
        hier_mode = self.hier_mode
        if hier_mode is None and space.has_hierarchy:
            hier_mode = ALGEBRAIC
        template = default_config(space, kind=self.kernel,
                                  hier_mode=hier_mode, nugget=self.nugget)
        self.model_ = fit_gp(doe, template,
                             FitOptions(self.multistart, self.maxiter, self.seed),
                             n_components=self.n_components)
        self.space_ = space
        return self

    def predict(self, X, return_std: bool = False):
        if not hasattr(self, "model_"):
            raise RuntimeError("fit must be called before predict")
        return self.model_.predict(X, return_std=return_std)
