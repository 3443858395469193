"""Ground-truth densities for experiments: Gaussian mixtures, samplers, mode and saddle finders.

Sampling uses numpy's ``Generator`` over the PCG64 bit generator
(``numpy.random.default_rng(seed)``): component labels are drawn first with
``Generator.choice`` and Gaussian offsets second with
``Generator.standard_normal``, so a given ``(seed, n)`` always yields the
same points.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._util import InputError

__all__ = [
    "MixtureDensity",
    "FlatDensity",
    "ConditionalMixture",
    "CatalogEntry",
    "CATALOG",
    "catalog_entry",
    "density_at",
    "sample",
    "true_modes",
    "saddle_level_1d",
    "golden_max",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class MixtureDensity:
    """Mixture of axis-aligned Gaussians in ``R^d``.

    Parameters
    ----------
    weights : sequence of float
        Positive mixture weights summing to one (zero weights are allowed and
        simply never sampled).
    means : array_like, shape (K, d) or (K,)
    variances : array_like, shape (K, d), (K,) or scalar
        Diagonal covariance entries.
    """

    def __init__(self, weights, means, variances):
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        mu = np.asarray(means, dtype=np.float64)
        if mu.ndim == 1:
            mu = mu.reshape(-1, 1)
        var = np.asarray(variances, dtype=np.float64)
        if var.ndim == 1:
            var = var.reshape(-1, 1)
        var = np.broadcast_to(var, mu.shape).copy()
        if w.shape[0] != mu.shape[0]:
            raise InputError(f"{w.shape[0]} weights for {mu.shape[0]} components")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise InputError("weights must be non-negative and sum to 1")
        if np.any(var <= 0):
            raise InputError("variances must be positive")
        self.weights = w
        self.means = mu
        self.variances = var
        self.dim = mu.shape[1]

    def __repr__(self) -> str:
        return (
            f"MixtureDensity(weights={self.weights.tolist()}, means={self.means.tolist()}, "
            f"variances={self.variances.tolist()})"
        )

    def _points(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=np.float64)
        if self.dim == 1 and arr.ndim <= 1:
            return arr.reshape(-1, 1)
        arr = np.atleast_2d(arr)
        if arr.shape[1] != self.dim:
            raise InputError(f"points have dimension {arr.shape[1]}, density has {self.dim}")
        return arr

    def _component_pdf(self, pts: np.ndarray) -> np.ndarray:
        z2 = np.zeros((pts.shape[0], self.weights.shape[0]))
        for j in range(self.dim):
            diff = pts[:, j, None] - self.means[None, :, j]
            z2 += diff * diff / self.variances[None, :, j]
        norm = np.prod(2.0 * math.pi * self.variances, axis=1) ** -0.5
        return norm[None, :] * np.exp(-0.5 * z2)

    def __call__(self, x) -> np.ndarray:
        pts = self._points(x)
        out = self._component_pdf(pts) @ self.weights
        if np.ndim(x) == 0:
            return out[0]
        return out

    def gradient(self, x) -> np.ndarray:
        pts = self._points(x)
        comp = self._component_pdf(pts) * self.weights[None, :]
        grad = np.zeros_like(pts)
        for j in range(self.dim):
            grad[:, j] = -(comp * (pts[:, j, None] - self.means[None, :, j]) / self.variances[None, :, j]).sum(axis=1)
        return grad

    def lipschitz_bound(self) -> float:
        """Upper bound on ``|grad f|`` over all of ``R^d``."""
        sd_min = np.sqrt(self.variances.min(axis=1))
        peak = np.prod(2.0 * math.pi * self.variances, axis=1) ** -0.5
        return float(np.sum(self.weights * peak * math.exp(-0.5) / sd_min))

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise InputError(f"n must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        comp = rng.choice(self.weights.shape[0], size=n, p=self.weights)
        z = rng.standard_normal((n, self.dim))
        return self.means[comp] + np.sqrt(self.variances[comp]) * z


class FlatDensity:
    """Uniform density on an interval: the flat counter-example with no modes."""

    dim = 1

    def __init__(self, low: float = 0.0, high: float = 1.0):
        if not high > low:
            raise InputError("need high > low")
        self.low, self.high = float(low), float(high)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x >= self.low) & (x <= self.high)
        return np.where(inside, 1.0 / (self.high - self.low), 0.0)

    def lipschitz_bound(self) -> float:
        # constant on its support; callers only probe interior points
        return 0.0

    def sample(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.uniform(self.low, self.high, size=(n, 1))


class ConditionalMixture:
    """Joint law of ``(x, y)`` with ``x`` uniform on a box and ``y | x`` a 1-D mixture.

    ``conditional`` maps an ``x`` (array of shape ``(d,)``) to the
    :class:`MixtureDensity` of ``y`` given that ``x``; by default it ignores
    ``x``.
    """

    def __init__(self, low: Sequence[float], high: Sequence[float], conditional: MixtureDensity,
                 shift: Callable[[np.ndarray], float] | None = None):
        self.low = np.atleast_1d(np.asarray(low, dtype=np.float64))
        self.high = np.atleast_1d(np.asarray(high, dtype=np.float64))
        if conditional.dim != 1:
            raise InputError("conditional density must be one-dimensional")
        self.conditional_base = conditional
        self.shift = shift
        self.dim = self.low.shape[0] + 1

    def conditional(self, x) -> MixtureDensity:
        base = self.conditional_base
        if self.shift is None:
            return base
        s = float(self.shift(np.asarray(x, dtype=np.float64)))
        return MixtureDensity(base.weights, base.means + s, base.variances)

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise InputError(f"n must be >= 1, got {n}")
        rng = np.random.default_rng(seed)
        x = rng.uniform(self.low, self.high, size=(n, self.low.shape[0]))
        base = self.conditional_base
        comp = rng.choice(base.weights.shape[0], size=n, p=base.weights)
        z = rng.standard_normal(n)
        y = base.means[comp, 0] + np.sqrt(base.variances[comp, 0]) * z
        if self.shift is not None:
            y = y + np.array([self.shift(row) for row in x])
        return np.column_stack([x, y])

    def conditional_modes(self, x, grid_step: float = 1e-3) -> np.ndarray:
        cond = self.conditional(x)
        lo = float(cond.means.min() - 6 * np.sqrt(cond.variances.max()))
        hi = float(cond.means.max() + 6 * np.sqrt(cond.variances.max()))
        return true_modes(cond, ([lo], [hi]), grid_step)[:, 0]


def density_at(m: MixtureDensity, x) -> np.ndarray:
    return m(x)


def sample(m, n: int, seed: int) -> np.ndarray:
    return m.sample(n, seed)


def golden_max(f: Callable[[float], float], a: float, b: float, tol: float = 1e-8) -> float:
    """Maximiser of a unimodal ``f`` on ``[a, b]`` by golden-section search."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def true_modes(m: MixtureDensity, search_box, grid_step: float, tol: float = 1e-8,
               dedup: float = 1e-4) -> np.ndarray:
    """Local maxima of ``m`` inside ``search_box = (low, high)``.

    Grid local maxima are refined by cyclic coordinate-wise golden-section
    search and then deduplicated.
    """
    low = np.atleast_1d(np.asarray(search_box[0], dtype=np.float64))
    high = np.atleast_1d(np.asarray(search_box[1], dtype=np.float64))
    if low.shape[0] != m.dim or high.shape[0] != m.dim:
        raise InputError("search box dimension does not match the density")
    axes = [np.arange(lo, hi + 0.5 * grid_step, grid_step) for lo, hi in zip(low, high)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    shape = mesh.shape[:-1]
    vals = m(mesh.reshape(-1, m.dim)).reshape(shape)

    padded = np.pad(vals, 1, mode="constant", constant_values=-np.inf)
    is_max = np.ones(shape, dtype=bool)
    centre = tuple(slice(1, s + 1) for s in shape)
    for offset in itertools.product((-1, 0, 1), repeat=m.dim):
        if not any(offset):
            continue
        shifted = tuple(slice(1 + o, s + 1 + o) for o, s in zip(offset, shape))
        is_max &= padded[centre] >= padded[shifted]
    # drop plateaus of exactly zero density (underflow far from all components)
    is_max &= vals > 0

    found: list[np.ndarray] = []
    for idx in zip(*np.nonzero(is_max)):
        p = mesh[idx].copy()
        for _ in range(100):
            before = p.copy()
            for j in range(m.dim):
                def along(t, j=j):
                    q = p.copy()
                    q[j] = t
                    return float(m(q[None, :])[0])
                p[j] = golden_max(along, p[j] - grid_step, p[j] + grid_step, tol)
            if np.max(np.abs(p - before)) < tol:
                break
        if not any(np.max(np.abs(p - q)) < dedup for q in found):
            found.append(p)
    found.sort(key=lambda v: tuple(v))
    return np.array(found).reshape(-1, m.dim)


def saddle_level_1d(m: MixtureDensity, a: float, b: float, grid_step: float = 1e-3,
                    tol: float = 1e-8) -> float:
    """Minimum of a 1-D density over ``[a, b]``, which must be attained in the interior."""
    if m.dim != 1:
        raise InputError("saddle_level_1d needs a one-dimensional density")
    a, b = float(min(a, b)), float(max(a, b))
    grid = np.linspace(a, b, max(3, int(math.ceil((b - a) / grid_step)) + 1))
    vals = m(grid)
    k = int(np.argmin(vals))
    if k == 0 or k == grid.size - 1:
        raise InputError(f"density has no interior minimum on [{a}, {b}]")
    t = golden_max(lambda s: -float(m(np.array([s]))[0]), grid[k - 1], grid[k + 1], tol)
    return float(m(np.array([t]))[0])


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    density: object
    description: str
    assumptions: str
    modes: tuple = field(default=())

    def sample(self, n: int, seed: int) -> np.ndarray:
        return self.density.sample(n, seed)


def _normal(mean, sd):
    return (mean, sd * sd)


CATALOG: dict[str, CatalogEntry] = {}


def _register(entry: CatalogEntry) -> None:
    CATALOG[entry.name] = entry


_register(CatalogEntry(
    "standard-normal",
    MixtureDensity([1.0], [0.0], [1.0]),
    "N(0, 1) in one dimension.",
    "Single strictly log-concave component: Hoelder, level sets continuous, one mode with "
    "negative curvature, level sets are intervals.",
    (0.0,),
))
_register(CatalogEntry(
    "two-gaussian-10sep",
    MixtureDensity([0.5, 0.5], [0.0, 10.0], [0.25, 0.25]),
    "Equal mixture of N(0, 0.5^2) and N(10, 0.5^2).",
    "Components 20 sd apart: two modes at the means to within 1e-6, negative curvature at each, "
    "no flat regions.  Support is not compact; the tails are below 1e-20 beyond 5 units.",
    (0.0, 10.0),
))
_register(CatalogEntry(
    "major-minor-bump",
    MixtureDensity([0.9, 0.1], [0.0, 1.5], [0.09, 0.09]),
    "0.9 N(0, 0.3^2) + 0.1 N(1.5, 0.3^2): dominant mode at 0, minor mode near 1.5.",
    "Two modes with negative curvature and a valley near 0.91.  The minor mode is the maximum of "
    "its radius-0.5 ball but not of its radius-2 ball, so it survives small tau and is absorbed "
    "for tau above its distance to the dominant mode.",
))
_register(CatalogEntry(
    "trimodal",
    MixtureDensity([1 / 3, 1 / 3, 1 / 3], [0.0, 5.0, 10.0], [2.25, 2.25, 2.25]),
    "Equal mixture of N(0, 1.5^2), N(5, 1.5^2), N(10, 1.5^2).",
    "Three modes with negative curvature separated by two saddles; level sets are unions of at "
    "most three intervals and vary continuously with the level.",
))
_register(CatalogEntry(
    "bimodal-conditional",
    ConditionalMixture([0.0], [1.0], MixtureDensity([0.5, 0.5], [-2.0, 2.0], [0.0625, 0.0625])),
    "x ~ U[0, 1]; y | x ~ 0.5 N(-2, 0.25^2) + 0.5 N(2, 0.25^2) for every x.",
    "Each conditional has two modes at +-2 (to within 1e-12) with negative curvature.",
    (-2.0, 2.0),
))
_register(CatalogEntry(
    "normal-conditional",
    ConditionalMixture([0.0], [1.0], MixtureDensity([1.0], [0.0], [1.0])),
    "x ~ U[0, 1]; y | x ~ N(0, 1).",
    "Each conditional is N(0, 1): one mode at 0.",
    (0.0,),
))
_register(CatalogEntry(
    "flat",
    FlatDensity(0.0, 1.0),
    "Uniform on [0, 1]; deliberately violates the no-flat-region and isolated-mode assumptions.",
    "Violates level-set continuity and the mode assumption; documents the failure mode where "
    "Quick Shift roots are arbitrary.",
))


def catalog_entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise InputError(f"unknown catalog entry {name!r}; choose from {sorted(CATALOG)}") from None
