"""Radial kernels and kernel density estimation.

Every kernel is given by an unnormalised radial profile ``k(t)``, ``t = ||u||``,
and is rescaled in each ambient dimension ``d`` so that ``K(u) = c_d k(||u||)``
integrates to one over ``R^d``.  Compactly supported profiles include their
boundary (``t <= 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from ._util import CHUNK_ROWS, InputError, as_points, map_chunks, sq_distances

__all__ = [
    "Kernel",
    "DensityModel",
    "KERNELS",
    "get_kernel",
    "kde_evaluate",
    "kde_self_evaluate",
    "recommended_bandwidth",
    "truncation_error_bound",
]

# First zero of exp(-t/sqrt2) * sin(t/sqrt2 + pi/4); the profile is cut there.
_SILVERMAN_CUT = 3.0 * math.pi * math.sqrt(2.0) / 4.0


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _sphere_area(d: int) -> float:
    # surface area of the unit sphere in R^d
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


# Exponential profiles are cut to exactly zero once the exponent drops below
# -700 (values under 1e-304); the far tail otherwise hits numpy's slow
# underflow path.
_EXP_FLOOR = -700.0


def _gaussian(t):
    e = -0.5 * np.asarray(t, dtype=np.float64) ** 2
    return np.where(e >= _EXP_FLOOR, np.exp(np.maximum(e, _EXP_FLOOR)), 0.0)


# Profiles written in terms of s = t**2; they may overwrite their argument.
def _gaussian_sq(s):
    s *= -0.5
    keep = s >= _EXP_FLOOR
    np.maximum(s, _EXP_FLOOR, out=s)
    np.exp(s, out=s)
    # masked assignment is several times slower than this multiply
    np.multiply(s, keep, out=s)
    return s


def _epanechnikov_sq(s):
    return np.where(s <= 1.0, 1.0 - s, 0.0)


def _uniform_sq(s):
    return np.where(s <= 1.0, 1.0, 0.0)


def _epanechnikov(t):
    return np.where(t <= 1.0, 1.0 - t * t, 0.0)


def _uniform(t):
    return np.where(t <= 1.0, 1.0, 0.0)


def _triangular(t):
    return np.where(t <= 1.0, 1.0 - t, 0.0)


def _exponential(t):
    e = -np.asarray(t, dtype=np.float64)
    return np.where(e >= _EXP_FLOOR, np.exp(np.maximum(e, _EXP_FLOOR)), 0.0)


def _tricube(t):
    return np.where(t <= 1.0, (1.0 - t**3) ** 3, 0.0)


def _cosine(t):
    return np.where(t <= 1.0, np.cos(0.5 * math.pi * np.minimum(t, 1.0)), 0.0)


def _silverman(t):
    a = t / math.sqrt(2.0)
    return np.where(t <= _SILVERMAN_CUT, np.exp(-a) * np.sin(a + 0.25 * math.pi), 0.0)


@dataclass(frozen=True)
class Kernel:
    """A spherically symmetric, non-increasing kernel.

    ``support`` is the radius beyond which the profile vanishes (``inf`` for
    kernels with unbounded support).
    """

    name: str
    profile: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    support: float = math.inf
    sq_profile: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)

    def normalizer(self, d: int) -> float:
        """Constant ``c_d`` with ``integral of c_d k(||u||) du = 1`` over ``R^d``."""
        return _normalizer(self.name, int(d))

    def radial(self, t, d: int) -> np.ndarray:
        """Normalised kernel value ``K(u)`` as a function of ``t = ||u||``."""
        t = np.asarray(t, dtype=np.float64)
        return self.normalizer(d) * self.profile(t)

    def __call__(self, u) -> np.ndarray:
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        t = np.sqrt(np.einsum("ij,ij->i", u, u))
        return self.radial(t, u.shape[1])


KERNELS: dict[str, Kernel] = {
    "gaussian": Kernel("gaussian", _gaussian, math.inf, _gaussian_sq),
    "epanechnikov": Kernel("epanechnikov", _epanechnikov, 1.0, _epanechnikov_sq),
    "uniform": Kernel("uniform", _uniform, 1.0, _uniform_sq),
    "triangular": Kernel("triangular", _triangular, 1.0),
    "exponential": Kernel("exponential", _exponential),
    "tricube": Kernel("tricube", _tricube, 1.0),
    "cosine": Kernel("cosine", _cosine, 1.0),
    "silverman": Kernel("silverman", _silverman, _SILVERMAN_CUT),
}


def get_kernel(kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    try:
        return KERNELS[str(kernel).lower()]
    except KeyError:
        raise InputError(f"unknown kernel {kernel!r}; choose from {sorted(KERNELS)}") from None


@lru_cache(maxsize=None)
def _normalizer(name: str, d: int) -> float:
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}")
    if name == "gaussian":
        return (2.0 * math.pi) ** (-d / 2)
    if name == "uniform":
        return 1.0 / _unit_ball_volume(d)
    if name == "epanechnikov":
        return (d + 2) / (2.0 * _unit_ball_volume(d))
    kernel = KERNELS[name]
    upper = kernel.support if math.isfinite(kernel.support) else np.inf
    mass, _ = integrate.quad(
        lambda t: float(kernel.profile(np.float64(t))) * t ** (d - 1),
        0.0,
        upper,
        epsabs=1e-14,
        epsrel=1e-13,
        limit=200,
    )
    return 1.0 / (_sphere_area(d) * mass)


@dataclass(frozen=True)
class DensityModel:
    """Kernel plus bandwidth, fixing the estimator ``f_h`` in dimension ``dim``."""

    kernel: Kernel
    bandwidth: float
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "kernel", get_kernel(self.kernel))
        h = float(self.bandwidth)
        if not (math.isfinite(h) and h > 0):
            raise InputError(f"bandwidth must be a positive finite number, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", h)
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))


def _check(model: DensityModel, samples, queries=None):
    x = as_points(samples, "samples")
    if x.shape[1] != model.dim:
        raise InputError(f"samples have dimension {x.shape[1]}, model expects {model.dim}")
    if queries is None:
        return x, x
    q = as_points(queries, "queries", allow_empty=True)
    if q.shape[1] != model.dim:
        raise InputError(f"queries have dimension {q.shape[1]}, model expects {model.dim}")
    return x, q


def kde_evaluate(model: DensityModel, samples, queries, truncate: Optional[float] = None) -> np.ndarray:
    """Kernel density estimate at each query point.

    ``f_h(q) = 1 / (n h^d) * sum_i K((q - x_i) / h)``, summed over the samples
    in ascending index order.  The result is identical for any thread count.

    Parameters
    ----------
    model : DensityModel
    samples : array_like, shape (n, d)
    queries : array_like, shape (m, d)
    truncate : float, optional
        If given, samples farther than ``truncate * h`` from a query are
        skipped.  Each skipped sample changes the estimate by at most
        ``c_d k(truncate) / (n h^d)``; see :func:`truncation_error_bound`.
        The default is the exact full sum.

    Returns
    -------
    numpy.ndarray, shape (m,)
    """
    x, q = _check(model, samples, queries)
    if truncate is not None:
        return _kde_truncated(model, x, q, float(truncate))
    n, d = x.shape
    h = model.bandwidth
    kern = model.kernel
    scale = kern.normalizer(d) / (n * h**d)

    inv_h2 = 1.0 / (h * h)

    def block(lo, hi):
        s = sq_distances(q[lo:hi], x)
        s *= inv_h2
        if kern.sq_profile is not None:
            vals = kern.sq_profile(s)
        else:
            vals = kern.profile(np.sqrt(s, out=s))
        return vals.sum(axis=1)

    if q.shape[0] == 0:
        return np.zeros(0)
    # each row is reduced on its own, so the block height does not affect the sums
    rows = max(1, min(CHUNK_ROWS, (1 << 17) // n))
    return np.concatenate(map_chunks(block, q.shape[0], rows)) * scale


def kde_self_evaluate(model: DensityModel, samples) -> np.ndarray:
    """``kde_evaluate(model, samples, samples)``, bit for bit."""
    x, _ = _check(model, samples)
    return kde_evaluate(model, x, x)


def _kde_truncated(model: DensityModel, x: np.ndarray, q: np.ndarray, radius: float) -> np.ndarray:
    if not radius > 0:
        raise InputError(f"truncation radius must be positive, got {radius}")
    n, d = x.shape
    h = model.bandwidth
    kern = model.kernel
    tree = cKDTree(x)
    neighbors = tree.query_ball_point(q, r=radius * h)
    out = np.zeros(q.shape[0])
    for m, idx in enumerate(neighbors):
        if not idx:
            continue
        idx = np.sort(np.asarray(idx, dtype=np.intp))
        s = sq_distances(q[m : m + 1], x[idx])[0] / (h * h)
        vals = kern.sq_profile(s) if kern.sq_profile is not None else kern.profile(np.sqrt(s))
        out[m] = vals.sum()
    return out * (kern.normalizer(d) / (n * h**d))


def truncation_error_bound(model: DensityModel, n: int, radius: float) -> float:
    """Worst-case absolute error of the truncated estimate.

    Each omitted sample contributes at most ``K(radius) / (n h^d)``; at most
    ``n`` samples are omitted, so the total is ``K(radius) / h^d`` for any ``n``.
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    k_r = float(model.kernel.radial(np.float64(radius), model.dim))
    return k_r / model.bandwidth**model.dim


def recommended_bandwidth(n: int, d: int, c: float = 1.0) -> float:
    """Rate-optimal bandwidth for mode estimation, ``c * n ** (-1 / (4 + d))``."""
    if n < 1 or d < 1:
        raise InputError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if not c > 0:
        raise InputError(f"scale must be positive, got {c}")
    return float(c) * float(n) ** (-1.0 / (4 + d))
