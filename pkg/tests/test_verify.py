import math

import numpy as np
import pytest

from modeforest import DensityModel, InputError, InvariantError, build_forest
from modeforest.quickshift import QuickShiftForest
from modeforest import verify

X3 = [0.0, 1.0, 3.0]
D3 = [0.5, 0.9, 0.7]


def test_naive_kde_examples():
    assert verify.naive_kde(DensityModel("gaussian", 1.0, 1), [0.0], [0.0])[0] == pytest.approx(0.3989423, abs=1e-7)
    assert verify.naive_kde(DensityModel("uniform", 1.0, 1), [-1.0, 1.0], [0.0])[0] == pytest.approx(0.5)


def test_naive_parent_examples():
    assert [verify.naive_parent(X3, D3, 1.5, i) for i in range(3)] == [1, None, None]
    assert verify.naive_parents(X3, D3, math.inf) == [1, None, 1]
    assert verify.naive_parents(X3, [1.0, 1.0, 1.0], math.inf) == [None, None, None]


def test_naive_components_examples():
    assert verify.naive_components([0.0, 1.0, 5.0], [[0], [1], [2]], 2.0) == [[0, 1], [2]]
    assert verify.naive_components([0.0, 1.5, 3.0], [[0], [1], [2]], 2.0) == [[0, 1, 2]]
    assert verify.naive_components([0.0], [], 1.0) == []


def test_naive_reachability_and_assignments():
    par = [1, None, 1]
    assert verify.naive_reachable(par, 0, 1)
    assert not verify.naive_reachable(par, 0, 2)
    assert verify.naive_assignments(par) == [1, 1, 1]
    with pytest.raises(InvariantError):
        verify.naive_assignments([1, 0])


def test_check_forest_detects_corruption():
    f = build_forest(X3, D3, 1.5)
    verify.check_forest(f, X3)
    bad_parent = np.array([2, -1, -1])
    bad = QuickShiftForest(parent=bad_parent, density=f.density, tau=f.tau, edge_length=np.array([3.0, np.nan, np.nan]))
    with pytest.raises(InvariantError):
        verify.check_forest(bad, X3)
    orphan = QuickShiftForest(parent=np.array([-1, -1, -1]), density=f.density, tau=f.tau,
                              edge_length=np.full(3, np.nan))
    with pytest.raises(InvariantError):
        verify.check_forest(orphan, X3)


def test_dimension_errors():
    with pytest.raises(InputError):
        verify.naive_kde(DensityModel("gaussian", 1.0, 2), [0.0], [0.0])
    with pytest.raises(InputError):
        verify.naive_parent(X3, [0.1], 1.0, 0)
