"""Small estimator-API base and input validation helpers."""

from __future__ import annotations

import inspect

import numpy as np


class ParamsMixin:
    """sklearn-style ``get_params`` / ``set_params`` from ``__init__`` keywords."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p.name for p in sig.parameters.values()
                if p.name != "self" and p.kind != p.VAR_KEYWORD]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self


def check_array(X, *, ndim=2, dtype=float, name="X") -> np.ndarray:
    """Coerce to a finite ndarray of the requested dimensionality."""
    a = np.asarray(X, dtype=dtype)
    if a.ndim == ndim - 1:
        a = a[None, :] if ndim == 2 else a[:, None]
    if a.ndim != ndim:
        raise ValueError(f"{name}: expected {ndim}D array, got {a.ndim}D")
    if not np.isfinite(a).all():
        raise ValueError(f"{name}: non-finite values")
    return a


def check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return int(seed)
