"""Cluster-tree estimation from a Quick Shift forest.

At level ``lam`` the forest is restricted to samples with density ``> lam``,
split into the connected components of the surviving edges, and components
closer than the linking radius are merged until none remain.  Because the
surviving set only grows as ``lam`` decreases, the whole hierarchy is
captured by one union-find sweep over edges sorted by the level at which
they appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from ._util import (
    InputError,
    InvariantError,
    UnionFind,
    as_points,
    canonical_partition,
)
from .kernels import DensityModel
from .quickshift import QuickShiftForest, quickshift

__all__ = [
    "LevelComponents",
    "ClusterTree",
    "level_subgraph",
    "link",
    "cluster_tree",
    "tree_from_forest",
    "merge_height",
    "level_grid",
]


@dataclass(frozen=True)
class LevelComponents:
    level: float
    components: list

    def labels(self, n: int) -> np.ndarray:
        """Component id per sample, ``-1`` for samples absent at this level."""
        out = np.full(n, -1, dtype=np.intp)
        for c, comp in enumerate(self.components):
            out[comp] = c
        return out


def _label_groups(members: np.ndarray, labels: np.ndarray) -> list[list[int]]:
    order = np.lexsort((members, labels))
    members, labels = members[order], labels[order]
    cuts = np.flatnonzero(np.diff(labels)) + 1
    return canonical_partition(g.tolist() for g in np.split(members, cuts))


def _components(n_nodes: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    graph = coo_matrix((np.ones(a.shape[0]), (a, b)), shape=(n_nodes, n_nodes))
    return connected_components(graph, directed=False)[1]


def level_subgraph(forest: QuickShiftForest, level: float) -> LevelComponents:
    """Connected components of the forest restricted to density ``> level``."""
    alive = forest.density > level
    idx = np.flatnonzero(alive)
    if idx.size == 0:
        return LevelComponents(float(level), [])
    pos = np.full(forest.n, -1, dtype=np.intp)
    pos[idx] = np.arange(idx.size)
    edges = forest.edges()
    edges = edges[alive[edges[:, 0]] & alive[edges[:, 1]]]
    labels = _components(idx.size, pos[edges[:, 0]], pos[edges[:, 1]])
    return LevelComponents(float(level), _label_groups(idx, labels))


def _close_pairs(x: np.ndarray, radius: float) -> np.ndarray:
    """Index pairs ``i < j`` with Euclidean distance strictly below ``radius``."""
    if x.shape[0] < 2:
        return np.zeros((0, 2), dtype=np.intp)
    if math.isinf(radius):
        i, j = np.triu_indices(x.shape[0], k=1)
        return np.column_stack([i, j])
    pairs = cKDTree(x).query_pairs(r=radius, output_type="ndarray")
    if pairs.size == 0:
        return np.zeros((0, 2), dtype=np.intp)
    diff = x[pairs[:, 0]] - x[pairs[:, 1]]
    d2 = np.zeros(pairs.shape[0])
    for k in range(x.shape[1]):
        d2 += diff[:, k] * diff[:, k]
    return pairs[np.sqrt(d2) < radius]


def link(components: Sequence[Sequence[int]], samples, delta: float) -> list[list[int]]:
    """Merge components whose closest points are less than ``delta`` apart, to a fixpoint."""
    x = as_points(samples, "samples")
    delta = float(delta)
    if math.isnan(delta) or delta <= 0:
        raise InputError(f"delta must be positive, got {delta}")
    comps = [list(map(int, c)) for c in components]
    members = [i for c in comps for i in c]
    if len(set(members)) != len(members):
        raise InputError("components overlap")
    if not members:
        return []
    if min(members) < 0 or max(members) >= x.shape[0]:
        raise InputError("component index out of range")

    idx = np.asarray(members, dtype=np.intp)
    label = np.concatenate([np.full(len(c), k, dtype=np.intp) for k, c in enumerate(comps)])
    pairs = _close_pairs(x[idx], delta)
    merged = _components(len(comps), label[pairs[:, 0]], label[pairs[:, 1]])
    return _label_groups(idx, merged[label])


def level_grid(density) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation levels and the level index at which each sample appears.

    With distinct values ``v_1 > ... > v_m`` the levels are the midpoints
    ``(v_k + v_{k+1}) / 2``; the last level sits halfway between ``v_m`` and
    zero (or one previous gap below ``v_m`` when ``v_m <= 0``).  Level ``k``
    therefore keeps exactly the samples with density ``>= v_k``.
    """
    dens = np.asarray(density, dtype=np.float64)
    values = np.unique(dens)[::-1]
    if values.size == 0:
        return np.zeros(0), np.zeros(0, dtype=np.intp)
    last = values[-1]
    if last > 0:
        below = 0.0
    elif values.size > 1:
        below = last - (values[-2] - last)
    else:
        below = last - 1.0
    nxt = np.append(values[1:], below)
    levels = 0.5 * (values + nxt)
    entry = (values.size - 1 - np.searchsorted(values[::-1], dens)).astype(np.intp)
    return levels, entry


class ClusterTree:
    """Nested partitions of the samples, one per level, highest level first.

    The tree is stored as its merge history: ``entry[i]`` is the index of the
    first level containing sample ``i`` and ``merges`` lists ``(k, i, j)``
    rows meaning that the components of ``i`` and ``j`` join at level ``k``.
    """

    def __init__(self, levels, entry, merges, tau: float):
        self.levels = np.asarray(levels, dtype=np.float64)
        self.entry = np.asarray(entry, dtype=np.intp)
        self.merges = np.asarray(merges, dtype=np.intp).reshape(-1, 3)
        self.tau = float(tau)
        if self.levels.size > 1 and not np.all(np.diff(self.levels) < 0):
            raise InvariantError("levels must be strictly decreasing")
        if self.merges.size and np.any(np.diff(self.merges[:, 0]) < 0):
            raise InvariantError("merges must be sorted by level")

    @property
    def n(self) -> int:
        return int(self.entry.shape[0])

    def __len__(self) -> int:
        return int(self.levels.shape[0])

    def iter_levels(self) -> Iterator[LevelComponents]:
        uf = UnionFind(self.n)
        order = np.argsort(self.entry, kind="stable")
        alive: list[int] = []
        pos = 0
        m = 0
        for k, lam in enumerate(self.levels):
            while pos < order.size and self.entry[order[pos]] <= k:
                alive.append(int(order[pos]))
                pos += 1
            while m < self.merges.shape[0] and self.merges[m, 0] <= k:
                uf.union(int(self.merges[m, 1]), int(self.merges[m, 2]))
                m += 1
            groups: dict[int, list[int]] = {}
            for i in alive:
                groups.setdefault(uf.find(i), []).append(i)
            yield LevelComponents(float(lam), canonical_partition(groups.values()))

    def level(self, k: int) -> LevelComponents:
        if not 0 <= k < len(self):
            raise IndexError(k)
        uf = UnionFind(self.n)
        for lev, i, j in self.merges:
            if lev > k:
                break
            uf.union(int(i), int(j))
        groups: dict[int, list[int]] = {}
        for i in np.flatnonzero(self.entry <= k):
            groups.setdefault(uf.find(int(i)), []).append(int(i))
        return LevelComponents(float(self.levels[k]), canonical_partition(groups.values()))

    def level_index(self, lam: float) -> int:
        """Index of the highest stored level that is ``<= lam``.

        Returns ``len(self)`` when ``lam`` is below every stored level.
        """
        return int(np.searchsorted(-self.levels, -float(lam), side="left"))

    def check_nesting(self) -> None:
        """Raise :class:`InvariantError` unless every level refines the next lower one."""
        prev = None
        for lc in self.iter_levels():
            lab = lc.labels(self.n)
            if prev is not None:
                for comp in prev.components:
                    if len({int(lab[i]) for i in comp}) != 1 or lab[comp[0]] < 0:
                        raise InvariantError(f"component {comp} split at level {lc.level}")
            prev = lc

    def to_levels(self) -> list[LevelComponents]:
        return list(self.iter_levels())

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClusterTree):
            return NotImplemented
        if self.tau != other.tau or not np.array_equal(self.levels, other.levels):
            return False
        if not np.array_equal(self.entry, other.entry):
            return False
        return all(a.components == b.components for a, b in zip(self.iter_levels(), other.iter_levels()))

    @classmethod
    def from_levels(cls, levels: Sequence[LevelComponents], tau: float) -> "ClusterTree":
        """Rebuild the merge history from explicit per-level partitions."""
        lv = np.array([lc.level for lc in levels], dtype=np.float64)
        n = 1 + max((i for lc in levels for c in lc.components for i in c), default=-1)
        entry = np.full(n, -1, dtype=np.intp)
        merges = []
        uf = UnionFind(n)
        for k, lc in enumerate(levels):
            for comp in lc.components:
                for i in comp:
                    if entry[i] < 0:
                        entry[i] = k
                head = comp[0]
                for i in comp[1:]:
                    if uf.union(head, i):
                        merges.append((k, head, i))
        if np.any(entry < 0):
            raise InputError("some sample indices never appear in any level")
        tree = cls(lv, entry, merges, tau)
        for lc, got in zip(levels, tree.iter_levels()):
            if canonical_partition(lc.components) != got.components:
                raise InvariantError("levels are not nested")
        return tree


def tree_from_forest(forest: QuickShiftForest, samples, radius: float | None = None) -> ClusterTree:
    """Cluster tree from an existing forest, linking at ``radius`` (default: the forest's tau)."""
    x = as_points(samples, "samples")
    if x.shape[0] != forest.n:
        raise InputError(f"forest has {forest.n} nodes but {x.shape[0]} samples were given")
    radius = forest.tau if radius is None else float(radius)
    if math.isnan(radius) or radius <= 0:
        raise InputError(f"linking radius must be positive, got {radius}")
    levels, entry = level_grid(forest.density)
    n = forest.n

    pairs = np.concatenate([forest.edges(), _close_pairs(x, radius)]).astype(np.intp)
    if pairs.shape[0] == 0:
        return ClusterTree(levels, entry, np.zeros((0, 3), dtype=np.intp), radius)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    key = np.unique(lo * n + hi)
    lo, hi = key // n, key % n
    act = np.maximum(entry[lo], entry[hi])
    # A spanning forest of minimal activation levels has the same connectivity
    # at every threshold as the full edge set.
    graph = coo_matrix((act + 1.0, (lo, hi)), shape=(n, n)).tocsr()
    span = minimum_spanning_tree(graph).tocoo()
    order = np.lexsort((span.col, span.row, span.data))
    rows = np.column_stack(
        [span.data[order].astype(np.intp) - 1, span.row[order], span.col[order]]
    ).astype(np.intp)
    return ClusterTree(levels, entry, rows, radius)


def cluster_tree(samples, model: DensityModel, tau: float, method: str = "auto") -> ClusterTree:
    """Quick Shift followed by level-wise linking at radius ``tau``."""
    x = as_points(samples, "samples")
    forest = quickshift(x, model, tau, method=method)
    return tree_from_forest(forest, x, tau)


def merge_height(tree: ClusterTree, i: int, j: int) -> float:
    """Highest level at which samples ``i`` and ``j`` share a component.

    Returns ``-inf`` if they never do.
    """
    n = tree.n
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"indices must lie in [0, {n}), got {i} and {j}")
    if i == j:
        return float(tree.levels[tree.entry[i]])
    uf = UnionFind(n)
    for lev, a, b in tree.merges:
        uf.union(int(a), int(b))
        if uf.find(i) == uf.find(j):
            return float(tree.levels[lev])
    return -math.inf
