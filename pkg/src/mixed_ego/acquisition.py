"""Infill criteria: EI, WB2/WB2s, feasibility, and bi-objective extensions.

The bi-objective expected hypervolume improvement is computed exactly by a
vertical-stripe decomposition of the nondominated region (minimization,
independent Gaussian predictions), so a Monte-Carlo estimate converges to
it.  The probability-of-improvement variants and the regularization of a
scalar multi-objective criterion, gamma * alpha - psi(mu), follow the same
conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .metrics import pareto_filter

__all__ = [
    "AcquisitionConfig",
    "expected_improvement",
    "wb2",
    "wb2s",
    "wb2s_scale",
    "feasible_means",
    "constrained_feasible",
    "hypervolume",
    "ehvi",
    "prob_improvement",
    "min_prob_improvement",
    "mo_acquisition",
    "regularized",
]

_SQRT_2PI = np.sqrt(2.0 * np.pi)
_TINY_SD = 1e-300

EI, WB2, WB2S, EHVI_KIND, PI, MPI = "ei", "wb2", "wb2s", "ehvi", "pi", "mpi"
MONO_KINDS = (EI, WB2, WB2S)
MO_KINDS = (EHVI_KIND, PI, MPI)


@dataclass(frozen=True)
class AcquisitionConfig:
    """Criterion selection and its constants.

    ``gamma`` and ``psi`` act only on the multi-objective regularized form;
    ``ref_point`` (None = automatic per iteration) bounds the hypervolume.
    """

    kind: str = EI
    gamma: float = 1.0
    psi: str = "max"
    ref_point: tuple | None = None
    wb2s_beta: float = 100.0

    def __post_init__(self):
        if self.kind not in MONO_KINDS + MO_KINDS:
            raise ValueError(f"unknown acquisition kind {self.kind!r}")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.psi not in ("max", "sum", "none"):
            raise ValueError(f"unknown scalarization {self.psi!r}")


def _phi(z):
    with np.errstate(over="ignore"):  # z*z may overflow to inf; exp(-inf) = 0
        return np.exp(-0.5 * np.square(z)) / _SQRT_2PI


def expected_improvement(mean, sd, y_min: float):
    """(y_min - m) Phi(u) + s phi(u) with u = (y_min - m)/s; zero at s = 0."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if np.isnan(mean).any() or np.isnan(sd).any() or np.isnan(y_min):
        raise ValueError("NaN in expected-improvement inputs")
    if (sd < 0).any():
        raise ValueError("sd must be >= 0")
    s = np.where(sd > 0, sd, _TINY_SD)
    u = (y_min - mean) / s
    out = (y_min - mean) * ndtr(u) + sd * _phi(u)
    out = np.where(sd > 0, out, 0.0)
    return np.maximum(out, 0.0) if out.ndim else float(max(out, 0.0))


def wb2(mean, sd, y_min: float):
    """EI minus the predicted mean; smoother than EI near the incumbent."""
    return wb2s(mean, sd, y_min, 1.0)


def wb2s(mean, sd, y_min: float, scale: float):
    """Scaled criterion s * EI - mean; reduces to WB2 at s = 1."""
    if scale <= 0:
        raise ValueError("scale must be > 0")
    mean = np.asarray(mean, dtype=float)
    out = scale * expected_improvement(mean, sd, y_min) - mean
    return out if out.ndim else float(out)


def wb2s_scale(mean_at_ei_argmax: float, ei_at_argmax: float,
               beta: float = 100.0) -> float:
    """Scale so the EI term dominates at the EI maximizer; 1 when EI is zero."""
    if ei_at_argmax <= 0:
        return 1.0
    return beta * abs(mean_at_ei_argmax) / ei_at_argmax


def feasible_means(g_means, h_means, tolerance: float) -> bool:
    """All inequality means <= 0 and equality means within the closed band."""
    g = np.asarray(g_means, dtype=float).ravel()
    h = np.asarray(h_means, dtype=float).ravel()
    return bool(np.all(g <= 0.0) and np.all(np.abs(h) <= tolerance))


def constrained_feasible(x, g_models=(), h_models=(), tolerance: float = 1e-4) -> bool:
    """Feasibility of a point under the constraint surrogates' mean predictions."""
    g = [float(m.predict(x)[0]) for m in g_models]
    h = [float(m.predict(x)[0]) for m in h_models]
    return feasible_means(g, h, tolerance)


# ---------------------------------------------------------------------------
# bi-objective criteria
# ---------------------------------------------------------------------------

def _clean_front(front, ref=None) -> np.ndarray:
    front = np.atleast_2d(np.asarray(front, dtype=float))
    if front.shape[1] != 2:
        raise ValueError("only bi-objective fronts are supported")
    front = pareto_filter(front)
    if ref is not None:
        front = front[np.all(front < np.asarray(ref, dtype=float), axis=1)]
    return front[np.argsort(front[:, 0])]


def hypervolume(points, ref) -> float:
    """Area dominated by a bi-objective point set up to the reference point.

    Points that do not dominate the reference contribute nothing; adding a
    dominated point leaves the value unchanged.
    """
    ref = np.asarray(ref, dtype=float)
    if ref.shape != (2,):
        raise ValueError("only bi-objective hypervolume is supported")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        return 0.0
    P = _clean_front(P, ref)
    if P.shape[0] == 0:
        return 0.0
    hv = 0.0
    prev_f2 = ref[1]
    for p1, p2 in P:
        hv += (ref[0] - p1) * (prev_f2 - p2)
        prev_f2 = p2
    return float(hv)


def ehvi(means, sds, front, ref):
    """Exact bi-objective expected hypervolume improvement (minimization).

    ``means``/``sds`` are (m, 2) batches of independent Gaussian predictions;
    ``front`` the current nondominated objective vectors; ``ref`` the
    reference point.  Front members outside the reference box are ignored.
    """
    ref = np.asarray(ref, dtype=float)
    mu = np.atleast_2d(np.asarray(means, dtype=float))
    sd = np.atleast_2d(np.asarray(sds, dtype=float))
    if mu.shape[1] != 2 or sd.shape != mu.shape:
        raise ValueError("means and sds must be (m, 2)")
    P = _clean_front(front, ref) if np.asarray(front).size else np.zeros((0, 2))
    k = P.shape[0]
    # stripe boundaries in f1 and staircase heights in f2
    x = np.concatenate([[-np.inf], P[:, 0], [ref[0]]])       # (k+2,)
    S = np.concatenate([[ref[1]], P[:, 1]])                  # (k+1,)
    s1 = np.where(sd[:, 0] > 0, sd[:, 0], _TINY_SD)[:, None]
    s2 = np.where(sd[:, 1] > 0, sd[:, 1], _TINY_SD)[:, None]
    m1 = mu[:, 0][:, None]
    m2 = mu[:, 1][:, None]
    alpha = (x[None, :-1] - m1) / s1                         # (m, k+1)
    beta = (x[None, 1:] - m1) / s1
    cdf_a, cdf_b = ndtr(alpha), ndtr(beta)
    pdf_a, pdf_b = _phi(alpha), _phi(beta)
    prob = cdf_b - cdf_a
    e_width = (x[None, 1:] - m1) * prob + s1 * (pdf_b - pdf_a)
    z2 = (S[None, :] - m2) / s2
    psi2 = (S[None, :] - m2) * ndtr(z2) + s2 * _phi(z2)      # E[(S_j - Z2)^+]
    widths = np.diff(x)                                      # w_j, j = 0..k (w_0 = inf)
    w_psi = widths[None, 1:] * psi2[:, 1:] if k else np.zeros((mu.shape[0], 0))
    # suffix[i] = sum_{j > i} w_j psi_j
    suffix = np.zeros_like(psi2)
    if k:
        suffix[:, :-1] = np.cumsum(w_psi[:, ::-1], axis=1)[:, ::-1]
    total = np.sum(e_width * psi2 + prob * suffix, axis=1)
    out = np.maximum(total, 0.0)
    return out if np.asarray(means).ndim == 2 else float(out[0])


def prob_improvement(means, sds, front):
    """Probability that the candidate is nondominated against the front."""
    mu = np.atleast_2d(np.asarray(means, dtype=float))
    sd = np.atleast_2d(np.asarray(sds, dtype=float))
    if mu.shape[1] != 2:
        raise ValueError("only bi-objective fronts are supported")
    P = _clean_front(front) if np.asarray(front).size else np.zeros((0, 2))
    k = P.shape[0]
    s1 = np.where(sd[:, 0] > 0, sd[:, 0], _TINY_SD)[:, None]
    s2 = np.where(sd[:, 1] > 0, sd[:, 1], _TINY_SD)[:, None]
    x = np.concatenate([P[:, 0], [np.inf]])                  # stripe uppers
    cdf1 = ndtr((x[None, :] - mu[:, 0][:, None]) / s1)       # (m, k+1)
    heights = np.concatenate([[np.inf], P[:, 1]])            # nondominated caps
    cdf2 = ndtr((heights[None, :] - mu[:, 1][:, None]) / s2)
    stripe = np.diff(np.concatenate([np.zeros((mu.shape[0], 1)), cdf1], axis=1))
    out = np.sum(stripe * cdf2, axis=1)
    out = np.clip(out, 0.0, 1.0)
    return out if np.asarray(means).ndim == 2 else float(out[0])


def min_prob_improvement(means, sds, front):
    """Smallest pairwise improvement probability over the front members."""
    mu = np.atleast_2d(np.asarray(means, dtype=float))
    sd = np.atleast_2d(np.asarray(sds, dtype=float))
    P = np.atleast_2d(np.asarray(front, dtype=float))
    if P.size == 0:
        out = np.ones(mu.shape[0])
        return out if np.asarray(means).ndim == 2 else float(out[0])
    s = np.where(sd > 0, sd, _TINY_SD)
    # P(not dominated by y) = 1 - prod_q P(Z_q >= y_q)
    z = (P[None, :, :] - mu[:, None, :]) / s[:, None, :]
    p_dom = np.prod(1.0 - ndtr(z), axis=2)
    out = np.min(1.0 - p_dom, axis=1)
    out = np.clip(out, 0.0, 1.0)
    return out if np.asarray(means).ndim == 2 else float(out[0])


def mo_acquisition(kind: str, means, sds, front, ref=None):
    """Dispatch over the bi-objective criteria."""
    if kind == EHVI_KIND:
        if ref is None:
            raise ValueError("EHVI needs a reference point")
        return ehvi(means, sds, front, ref)
    if kind == PI:
        return prob_improvement(means, sds, front)
    if kind == MPI:
        return min_prob_improvement(means, sds, front)
    raise ValueError(f"unsupported multi-objective criterion {kind!r}")


def regularized(alpha_value, mu, gamma: float, psi: str = "max"):
    """gamma * alpha - psi(mu) with psi the max or the sum of the means.

    ``mu`` may be one mean vector or an (m, q) batch aligned with
    ``alpha_value``.
    """
    mu = np.asarray(mu, dtype=float)
    if mu.size == 0:
        raise ValueError("empty mean vector")
    axis = mu.ndim - 1
    if psi == "max":
        pen = np.max(mu, axis=axis)
    elif psi == "sum":
        pen = np.sum(mu, axis=axis)
    elif psi == "none":
        pen = 0.0
    else:
        raise ValueError(f"unknown scalarization {psi!r}")
    return gamma * np.asarray(alpha_value, dtype=float) - pen
