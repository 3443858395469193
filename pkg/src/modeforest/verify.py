"""Brute-force reference implementations.

These follow the definitions literally with plain Python loops and share no
code paths with the fast implementations beyond the kernel profiles.  They
are meant for cross-checking on small inputs (a few hundred points).
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from ._util import InputError, InvariantError, UnionFind, canonical_partition
from .kernels import DensityModel

__all__ = [
    "naive_kde",
    "naive_parent",
    "naive_parents",
    "naive_components",
    "naive_assignments",
    "naive_reachable",
    "naive_tree_levels",
    "check_forest",
]


def _rows(a, name):
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-D")
    return arr.tolist()


def _dist(p, q) -> float:
    s = 0.0
    for a, b in zip(p, q):
        s += (a - b) * (a - b)
    return math.sqrt(s)


def naive_kde(model: DensityModel, samples, queries) -> np.ndarray:
    x = _rows(samples, "samples")
    q = _rows(queries, "queries")
    if not x:
        raise InputError("samples is empty")
    d = len(x[0])
    if d != model.dim or (q and len(q[0]) != d):
        raise InputError("dimension mismatch")
    h = model.bandwidth
    c = model.kernel.normalizer(d)
    out = []
    for p in q:
        total = 0.0
        for xi in x:
            total += float(model.kernel.profile(np.float64(_dist(p, xi) / h)))
        out.append(c * total / (len(x) * h**d))
    return np.array(out)


def naive_parent(samples, density, tau: float, i: int):
    x = _rows(samples, "samples")
    dens = [float(v) for v in np.asarray(density).reshape(-1)]
    if len(dens) != len(x):
        raise InputError("length mismatch")
    best, best_d = None, math.inf
    exists = False
    for j in range(len(x)):
        if dens[j] > dens[i]:
            dj = _dist(x[i], x[j])
            if dj <= tau:
                exists = True
            if dj < best_d:
                best, best_d = j, dj
    return best if exists else None


def naive_parents(samples, density, tau: float) -> list:
    n = len(np.asarray(density).reshape(-1))
    return [naive_parent(samples, density, tau, i) for i in range(n)]


def naive_components(points, index_sets, delta: float) -> list[list[int]]:
    x = _rows(points, "points")
    sets = [list(map(int, s)) for s in index_sets]
    flat = [i for s in sets for i in s]
    if len(flat) != len(set(flat)):
        raise InputError("components overlap")
    uf = UnionFind(len(sets))
    for a in range(len(sets)):
        for b in range(a + 1, len(sets)):
            if any(_dist(x[i], x[j]) < delta for i in sets[a] for j in sets[b]):
                uf.union(a, b)
    merged: dict[int, list[int]] = {}
    for k, s in enumerate(sets):
        merged.setdefault(uf.find(k), []).extend(s)
    return canonical_partition(merged.values())


def naive_assignments(parent) -> list[int]:
    out = []
    for i in range(len(parent)):
        node, steps = i, 0
        while parent[node] is not None and parent[node] >= 0:
            node = parent[node]
            steps += 1
            if steps > len(parent):
                raise InvariantError("cycle")
        out.append(node)
    return out


def naive_reachable(parent, src: int, dst: int) -> bool:
    """Breadth-first search over the directed child -> parent edges."""
    adj = {i: [] for i in range(len(parent))}
    for i, p in enumerate(parent):
        if p is not None and p >= 0:
            adj[i].append(int(p))
    seen = {src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            return True
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


def naive_tree_levels(samples, density, parent, tau: float) -> list[tuple[float, list[list[int]]]]:
    """Every level of the cluster tree recomputed from scratch.

    Levels are the midpoints between consecutive distinct densities (the last
    one halfway to zero, or one gap lower when the smallest value is not
    positive).
    """
    dens = [float(v) for v in np.asarray(density).reshape(-1)]
    values = sorted(set(dens), reverse=True)
    out = []
    for k, v in enumerate(values):
        if k + 1 < len(values):
            below = values[k + 1]
        elif v > 0:
            below = 0.0
        elif len(values) > 1:
            below = v - (values[k - 1] - v)
        else:
            below = v - 1.0
        lam = 0.5 * (v + below)
        alive = [i for i in range(len(dens)) if dens[i] > lam]
        uf = UnionFind(len(dens))
        for i in alive:
            p = parent[i]
            if p is not None and p >= 0 and dens[p] > lam:
                uf.union(i, p)
        groups: dict[int, list[int]] = {}
        for i in alive:
            groups.setdefault(uf.find(i), []).append(i)
        out.append((lam, naive_components(samples, canonical_partition(groups.values()), tau)))
    return out


def check_forest(forest, samples) -> None:
    """Raise :class:`InvariantError` if ``forest`` breaks any Quick Shift invariant.

    Checks strict density increase along edges, edge lengths against tau,
    the nearest-higher parent rule with lowest-index ties, and the root
    condition.  Quadratic in the number of samples.
    """
    x = _rows(samples, "samples")
    dens = [float(v) for v in forest.density]
    parent = forest.parents()
    if len(x) != len(parent):
        raise InvariantError("forest and samples differ in size")
    for i, p in enumerate(parent):
        if p is not None:
            if not dens[p] > dens[i]:
                raise InvariantError(f"edge {i}->{p} does not increase density")
            if not _dist(x[i], x[p]) <= forest.tau:
                raise InvariantError(f"edge {i}->{p} longer than tau")
            if forest.edge_length[i] != _dist(x[i], x[p]):
                raise InvariantError(f"edge length of {i} is stale")
        expected = naive_parent(x, dens, forest.tau, i)
        if expected != p:
            raise InvariantError(f"parent of {i} is {p}, expected {expected}")
