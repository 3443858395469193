import json
import math

import numpy as np
import pytest

from modeforest import DensityModel, InputError, build_forest, cluster_tree, quickshift
from modeforest.serialization import (
    decode_float,
    dumps,
    encode_float,
    forest_from_dict,
    forest_to_dict,
    tree_from_dict,
    tree_to_dict,
)


def test_float_encoding():
    assert encode_float(math.inf) == "inf"
    assert encode_float(-math.inf) == "-inf"
    assert decode_float("-inf") == -math.inf
    with pytest.raises(InputError):
        encode_float(math.nan)
    with pytest.raises(InputError):
        decode_float("nan")


def test_forest_round_trip(rng):
    x = rng.normal(size=(200, 2))
    f = quickshift(x, DensityModel("gaussian", 0.4, 2), 0.5)
    text = dumps(forest_to_dict(f, 2, 0.4, "gaussian"))
    back = forest_from_dict(json.loads(text), x)
    assert back == f


def test_forest_round_trip_infinite_tau():
    x = [0.0, 1.0, 3.0]
    f = build_forest(x, [0.5, 0.9, 0.7], math.inf)
    obj = json.loads(dumps(forest_to_dict(f, 1, None, None)))
    assert obj["tau"] == "inf" and obj["parents"] == [1, None, 1] and obj["assignments"] == [1, 1, 1]
    assert forest_from_dict(obj, x) == f


def test_tree_round_trip(rng):
    x = rng.normal(size=(150, 1))
    t = cluster_tree(x, DensityModel("gaussian", 0.3, 1), 0.2)
    assert tree_from_dict(json.loads(dumps(tree_to_dict(t)))) == t


def test_dumps_is_stable(rng):
    x = rng.normal(size=(50, 1))
    f = quickshift(x, DensityModel("gaussian", 0.3, 1), 0.2)
    assert dumps(forest_to_dict(f, 1, 0.3, "gaussian")) == dumps(forest_to_dict(f, 1, 0.3, "gaussian"))


def test_malformed_input():
    with pytest.raises(InputError):
        forest_from_dict({"parents": [None]}, np.zeros((1, 1)))
    with pytest.raises(InputError):
        tree_from_dict({"levels": [{"level": 1.0}]})
