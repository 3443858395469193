"""Modal regression: modes of ``f(y | X = x)`` by Quick Shift along a density slice.

For a query ``x`` every response ``y_i`` is scored by the joint estimate
``f_h(x, y_i)``; the responses are then treated as 1-D points and run
through the ordinary forest construction with radius ``tau``.  The roots
are the estimated conditional modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._util import InputError, as_points
from .kernels import DensityModel, kde_evaluate
from .quickshift import QuickShiftForest, build_forest

__all__ = ["ConditionalModeResult", "modal_regression", "modal_regression_batch", "slice_density"]


@dataclass(frozen=True)
class ConditionalModeResult:
    x: np.ndarray
    mode_estimates: np.ndarray
    forest: QuickShiftForest

    @property
    def root_indices(self) -> np.ndarray:
        return self.forest.roots


def _split(data, model: DensityModel):
    z = as_points(data, "data")
    if z.shape[1] != model.dim:
        raise InputError(f"data have {z.shape[1]} columns, model expects {model.dim}")
    return z, z.shape[1] - 1


def slice_density(data, model: DensityModel, x) -> np.ndarray:
    """Joint estimate evaluated at ``(x, y_i)`` for every response ``y_i``."""
    z, d = _split(data, model)
    q = np.asarray(x, dtype=np.float64).reshape(-1)
    if q.shape[0] != d:
        raise InputError(f"query has dimension {q.shape[0]}, data have {d} covariates")
    points = np.column_stack([np.broadcast_to(q, (z.shape[0], d)), z[:, -1]])
    return kde_evaluate(model, z, points)


def modal_regression(data, model: DensityModel, tau: float, x, method: str = "auto") -> ConditionalModeResult:
    """Estimated modes of ``y`` given ``X = x``.

    ``data`` holds rows ``(x_i, y_i)`` with the response in the last column;
    ``model`` is the joint estimator on ``d + 1`` dimensions.
    """
    tau = float(tau)
    if math.isnan(tau) or tau <= 0:
        raise InputError(f"tau must be positive, got {tau}")
    z, _ = _split(data, model)
    s = slice_density(z, model, x)
    y = z[:, -1:]
    forest = build_forest(y, s, tau, method=method)
    roots = forest.roots
    return ConditionalModeResult(
        x=np.asarray(x, dtype=np.float64).reshape(-1), mode_estimates=y[roots, 0].copy(), forest=forest
    )


def modal_regression_batch(data, model: DensityModel, tau: float, queries, method: str = "auto") -> list[ConditionalModeResult]:
    """:func:`modal_regression` for each row of ``queries``."""
    z, d = _split(data, model)
    q = np.asarray(queries, dtype=np.float64)
    if q.ndim == 1:
        q = q.reshape(-1, d) if d else q.reshape(-1, 0)
    if q.ndim != 2 or q.shape[1] != d:
        raise InputError(f"queries must have {d} columns")
    return [modal_regression(z, model, tau, row, method=method) for row in q]
