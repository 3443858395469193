import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modeforest import (
    ClusterTree,
    DensityModel,
    InputError,
    build_forest,
    cluster_tree,
    level_subgraph,
    link,
    merge_height,
    quickshift,
    tau_schedule,
    tree_from_forest,
)
from modeforest.cluster_tree import level_grid
from modeforest.synthetic import catalog_entry, saddle_level_1d
from modeforest import verify

X3 = [0.0, 1.0, 3.0]
D3 = [0.5, 0.9, 0.7]


def test_level_subgraph_examples():
    f = build_forest(X3, D3, math.inf)
    assert level_subgraph(f, 0.6).components == [[1, 2]]
    assert level_subgraph(f, 0.9).components == []
    assert level_subgraph(f, 5.0).components == []
    g = build_forest(X3, D3, 1.5)
    assert level_subgraph(g, 0.0).components == [[0, 1], [2]]


def test_link_examples():
    assert link([[0], [1], [2]], [0.0, 1.0, 5.0], 2.0) == [[0, 1], [2]]
    assert link([[0], [1], [2]], [0.0, 1.5, 3.0], 2.0) == [[0, 1, 2]]
    assert link([], [0.0, 1.0], 1.0) == []


def test_link_is_strict():
    assert link([[0], [1]], [0.0, 2.0], 2.0) == [[0], [1]]


def test_link_rejects_overlap():
    with pytest.raises(InputError):
        link([[0, 1], [1]], [0.0, 1.0], 1.0)
    with pytest.raises(InputError):
        verify.naive_components([0.0, 1.0], [[0, 1], [1]], 1.0)


def test_level_grid_midpoints():
    levels, entry = level_grid([0.5, 0.9, 0.7, 0.9])
    np.testing.assert_allclose(levels, [0.8, 0.6, 0.25])
    assert entry.tolist() == [2, 0, 1, 0]


def test_single_sample_tree():
    t = cluster_tree([[2.0]], DensityModel("gaussian", 1.0, 1), 1.0)
    assert len(t) == 1
    assert t.level(0).components == [[0]]


def test_equal_densities_one_level_linked_by_proximity():
    x = [0.0, 0.5, 1.0, 4.0]
    f = build_forest(x, [0.2] * 4, 0.6)
    t = tree_from_forest(f, x)
    assert len(t) == 1
    assert t.level(0).components == [[0, 1, 2], [3]]


def test_merge_height_examples():
    x = [0.0, 1.0, 3.0]
    f = build_forest(x, D3, 1.5)
    t = tree_from_forest(f, x)
    # levels: 0.8, 0.6, 0.25
    assert merge_height(t, 1, 1) == pytest.approx(0.8)
    assert merge_height(t, 0, 0) == pytest.approx(0.25)
    assert merge_height(t, 0, 1) == pytest.approx(0.25)
    far = [0.0, 10.0]
    g = build_forest(far, [0.3, 0.4], 1.0)
    assert merge_height(tree_from_forest(g, far), 0, 1) == -math.inf
    with pytest.raises(InputError):
        merge_height(t, 0, 5)


def _random(seed, n, d, grid):
    g = np.random.default_rng(seed)
    x = g.normal(size=(n, d))
    if grid:
        x = np.round(x * 2) / 2
    dens = np.round(g.uniform(0, 1, n), 1) if grid else g.uniform(0, 1, n)
    return x, dens


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 40), d=st.integers(1, 3), grid=st.booleans(),
       tau=st.floats(0.05, 2.0))
def test_tree_levels_match_oracle(seed, n, d, grid, tau):
    x, dens = _random(seed, n, d, grid)
    f = build_forest(x, dens, tau)
    t = tree_from_forest(f, x)
    expected = verify.naive_tree_levels(x, dens, f.parents(), tau)
    got = t.to_levels()
    assert len(got) == len(expected)
    for lc, (lam, comps) in zip(got, expected):
        assert lc.level == pytest.approx(lam, rel=0, abs=1e-15)
        assert lc.components == comps
    t.check_nesting()
    for k in range(len(t)):
        assert t.level(k).components == got[k].components


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(1, 60), d=st.integers(1, 3), delta=st.floats(0.05, 2.0),
       lam=st.floats(0.0, 1.0))
def test_link_matches_oracle_and_is_idempotent(seed, n, d, delta, lam):
    x, dens = _random(seed, n, d, False)
    f = build_forest(x, dens, 1.0)
    comps = level_subgraph(f, lam).components
    once = link(comps, x, delta)
    assert once == verify.naive_components(x, comps, delta)
    assert link(once, x, delta) == once


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 40))
def test_merge_height_matches_level_scan(seed, n):
    x, dens = _random(seed, n, 2, False)
    f = build_forest(x, dens, 0.7)
    t = tree_from_forest(f, x)
    levels = t.to_levels()
    g = np.random.default_rng(seed)
    for _ in range(10):
        i, j = (int(v) for v in g.integers(0, n, 2))
        expected = -math.inf
        for lc in levels:
            lab = lc.labels(n)
            if lab[i] >= 0 and lab[i] == lab[j]:
                expected = lc.level
                break
        assert merge_height(t, i, j) == expected


def test_from_levels_round_trip(rng):
    x = rng.normal(size=(120, 2))
    t = cluster_tree(x, DensityModel("gaussian", 0.4, 2), 0.3)
    assert ClusterTree.from_levels(t.to_levels(), t.tau) == t


def test_level_index():
    x = [0.0, 1.0, 3.0]
    t = tree_from_forest(build_forest(x, D3, 1.5), x)
    assert t.level_index(0.85) == 0
    assert t.level_index(0.7) == 1
    assert t.level_index(-1.0) == 3


def test_trimodal_levels_against_saddle():
    entry = catalog_entry("trimodal")
    mu = saddle_level_1d(entry.density, 0.0, 5.0)
    n = 600
    tau = tau_schedule(n, 1)
    split = joined = 0
    for seed in range(20):
        x = entry.sample(n, seed)
        f = quickshift(x, DensityModel("gaussian", 0.5, 1), tau)
        i = int(np.argmin(np.abs(x[:, 0])))
        j = int(np.argmin(np.abs(x[:, 0] - 5.0)))
        above = np.full(n, -1)
        for k, c in enumerate(link(level_subgraph(f, 1.15 * mu).components, x, tau)):
            above[c] = k
        below = np.full(n, -1)
        for k, c in enumerate(link(level_subgraph(f, 0.5 * mu).components, x, tau)):
            below[c] = k
        split += above[i] >= 0 and above[j] >= 0 and above[i] != above[j]
        joined += below[i] >= 0 and below[i] == below[j]
    # 17 and 19 of 20 at the time of writing
    assert split >= 16
    assert joined >= 18
