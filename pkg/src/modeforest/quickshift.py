"""Quick Shift forests: link every sample to its nearest higher-density sample.

A sample becomes a root when no sample of strictly higher density lies within
distance ``tau`` of it.  Otherwise its parent is the nearest strictly-higher
sample over the whole set (lowest index on distance ties), which by the
existence condition is itself within ``tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._util import InputError, InvariantError, as_points, map_chunks, sq_distances
from .kernels import DensityModel, kde_self_evaluate

__all__ = [
    "QuickShiftForest",
    "ModeSet",
    "build_forest",
    "quickshift",
    "modes",
    "assignments",
    "directed_path_exists",
    "path_to_root",
    "tau_schedule",
]

# Above this many samples the tree-backed neighbour search is used by default.
_AUTO_INDEX_THRESHOLD = 1500


@dataclass(frozen=True, eq=False)
class QuickShiftForest:
    """The directed graph produced by Quick Shift.

    Attributes
    ----------
    parent : ndarray of int, shape (n,)
        Index of each sample's parent, ``-1`` for roots.
    density : ndarray of float, shape (n,)
        Density value attached to each sample.
    tau : float
        Segmentation radius, possibly ``inf``.
    edge_length : ndarray of float, shape (n,)
        Distance to the parent, ``nan`` for roots.
    """

    parent: np.ndarray
    density: np.ndarray
    tau: float
    edge_length: np.ndarray

    @property
    def n(self) -> int:
        return int(self.parent.shape[0])

    @property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent < 0)

    def parents(self) -> list:
        """Parent links as a list with ``None`` for roots."""
        return [None if p < 0 else int(p) for p in self.parent]

    def edges(self) -> np.ndarray:
        """``(child, parent)`` pairs, shape ``(n_edges, 2)``, ordered by child."""
        child = np.flatnonzero(self.parent >= 0)
        return np.column_stack([child, self.parent[child]])

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuickShiftForest):
            return NotImplemented
        return (
            self.tau == other.tau
            and np.array_equal(self.parent, other.parent)
            and np.array_equal(self.density, other.density)
            and np.array_equal(self.edge_length, other.edge_length, equal_nan=True)
        )


@dataclass(frozen=True)
class ModeSet:
    indices: np.ndarray
    coordinates: np.ndarray

    def __len__(self) -> int:
        return int(self.indices.shape[0])


def _check_tau(tau) -> float:
    tau = float(tau)
    if math.isnan(tau) or tau <= 0:
        raise InputError(f"tau must be positive (inf allowed), got {tau}")
    return tau


def build_forest(samples, density, tau, method: str = "auto") -> QuickShiftForest:
    """Build the Quick Shift forest for fixed per-sample densities.

    Parameters
    ----------
    samples : array_like, shape (n, d)
    density : array_like, shape (n,)
    tau : float
        Segmentation radius; ``math.inf`` links every non-maximal sample.
    method : {"auto", "brute", "kdtree"}
        Neighbour search strategy.  Both strategies return identical parents.
    """
    x = as_points(samples, "samples")
    dens = np.asarray(density, dtype=np.float64).reshape(-1)
    if dens.shape[0] != x.shape[0]:
        raise InputError(f"got {dens.shape[0]} density values for {x.shape[0]} samples")
    if not np.all(np.isfinite(dens)):
        raise InputError("density contains non-finite values")
    tau = _check_tau(tau)
    if method == "auto":
        method = "kdtree" if x.shape[0] > _AUTO_INDEX_THRESHOLD else "brute"
    if method == "brute":
        parent, length = _parents_brute(x, dens, tau)
    elif method == "kdtree":
        parent, length = _parents_kdtree(x, dens, tau)
    else:
        raise InputError(f"unknown method {method!r}")
    dens = dens.copy()
    for arr in (parent, dens, length):
        arr.flags.writeable = False
    return QuickShiftForest(parent=parent, density=dens, tau=tau, edge_length=length)


def _parents_brute(x, dens, tau):
    def block(lo, hi):
        dist = np.sqrt(sq_distances(x[lo:hi], x))
        dist[~(dens[None, :] > dens[lo:hi, None])] = np.inf
        j = np.argmin(dist, axis=1)
        best = dist[np.arange(hi - lo), j]
        linked = np.isfinite(best) & (best <= tau)
        return np.where(linked, j, -1), np.where(linked, best, np.nan)

    parts = map_chunks(block, x.shape[0])
    parent = np.concatenate([p for p, _ in parts]).astype(np.intp)
    length = np.concatenate([e for _, e in parts])
    return parent, length


def _parents_kdtree(x, dens, tau):
    n = x.shape[0]
    tree = cKDTree(x)
    parent = np.full(n, -1, dtype=np.intp)
    length = np.full(n, np.nan)
    # Slightly widened bound: candidates are re-measured exactly below.
    bound = tau * (1.0 + 1e-9) if math.isfinite(tau) else np.inf

    pending = np.arange(n)
    cand_of = np.full(n, -1, dtype=np.intp)
    cand_dist = np.full(n, np.nan)
    k = min(16, n)
    while pending.size:
        dd, ii = tree.query(x[pending], k=k, distance_upper_bound=bound)
        dd = dd.reshape(pending.size, k)
        ii = ii.reshape(pending.size, k)
        valid = ii < n
        higher = valid & (dens[np.minimum(ii, n - 1)] > dens[pending, None])
        found = higher.any(axis=1)
        first = np.argmax(higher, axis=1)
        rows = np.flatnonzero(found)
        cand_of[pending[rows]] = ii[rows, first[rows]]
        cand_dist[pending[rows]] = dd[rows, first[rows]]
        exhausted = (~valid[:, -1]) | (k >= n)
        pending = pending[~found & ~exhausted]
        k = min(4 * k, n)

    idx = np.flatnonzero(cand_of >= 0)
    if idx.size == 0:
        return parent, length
    radii = cand_dist[idx] * (1.0 + 1e-9) + 1e-300
    balls = tree.query_ball_point(x[idx], r=radii)
    for i, ball in zip(idx, balls):
        cand = np.sort(np.asarray(ball, dtype=np.intp))
        cand = cand[dens[cand] > dens[i]]
        dist = np.sqrt(sq_distances(x[i : i + 1], x[cand])[0])
        j = int(np.argmin(dist))
        if dist[j] <= tau:
            parent[i] = cand[j]
            length[i] = dist[j]
    return parent, length


def quickshift(samples, model: DensityModel, tau, method: str = "auto") -> QuickShiftForest:
    """Quick Shift on the kernel density estimate of ``samples`` itself."""
    x = as_points(samples, "samples")
    if x.shape[1] != model.dim:
        raise InputError(f"samples have dimension {x.shape[1]}, model expects {model.dim}")
    return build_forest(x, kde_self_evaluate(model, x), tau, method=method)


def modes(forest: QuickShiftForest, samples) -> ModeSet:
    x = as_points(samples, "samples")
    if x.shape[0] != forest.n:
        raise InputError(f"forest has {forest.n} nodes but {x.shape[0]} samples were given")
    idx = forest.roots
    return ModeSet(indices=idx, coordinates=x[idx])


def assignments(forest: QuickShiftForest) -> np.ndarray:
    """Root index reached from every sample by following parent links."""
    n = forest.n
    up = np.where(forest.parent < 0, np.arange(n), forest.parent)
    # pointer doubling; depth <= n - 1 so this takes O(log n) rounds
    for _ in range(max(1, n.bit_length() + 1)):
        nxt = up[up]
        if np.array_equal(nxt, up):
            return up
        up = nxt
    raise InvariantError("parent links contain a cycle")


def path_to_root(forest: QuickShiftForest, i: int) -> list[int]:
    """Indices visited from ``i`` (inclusive) up to its root (inclusive)."""
    path = [int(i)]
    parent = forest.parent
    while parent[path[-1]] >= 0:
        path.append(int(parent[path[-1]]))
        if len(path) > forest.n:
            raise InvariantError("parent links contain a cycle")
    return path


def directed_path_exists(forest: QuickShiftForest, src: int, dst: int) -> bool:
    """Whether following parent links from ``src`` reaches ``dst``."""
    n = forest.n
    if not (0 <= src < n and 0 <= dst < n):
        raise InputError(f"indices must lie in [0, {n}), got {src} and {dst}")
    parent = forest.parent
    node = int(src)
    # densities strictly increase along the path, so stop once we pass dst's
    target = forest.density[dst]
    while True:
        if node == dst:
            return True
        if forest.density[node] >= target:
            return False
        node = int(parent[node])
        if node < 0:
            return False


def tau_schedule(n: int, d: int, c: float = 1.0) -> float:
    """Linking radius ``max(c n^(-1/(4+d)), (log(n)^2 / n)^(1/d))`` for cluster trees."""
    if n < 1 or d < 1:
        raise InputError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    if not c > 0:
        raise InputError(f"scale must be positive, got {c}")
    floor = (math.log(n) ** 2 / n) ** (1.0 / d)
    return max(float(c) * n ** (-1.0 / (4 + d)), floor)
