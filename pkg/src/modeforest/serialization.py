"""JSON encoding of forests, cluster trees and modal-regression results.

Floats are written in Python's shortest round-trip form, so decoding gives
back bit-identical values.  Non-finite values are written as the strings
``"inf"`` and ``"-inf"``.  Key order is fixed.
"""

from __future__ import annotations

import json
import math
from typing import Optional

import numpy as np

from ._util import InputError, as_points, sq_distances
from .cluster_tree import ClusterTree, LevelComponents
from .modal_regression import ConditionalModeResult
from .quickshift import QuickShiftForest, assignments

__all__ = [
    "encode_float",
    "decode_float",
    "forest_to_dict",
    "forest_from_dict",
    "tree_to_dict",
    "tree_from_dict",
    "modal_to_dict",
    "dumps",
]


def encode_float(v: float):
    v = float(v)
    if math.isnan(v):
        raise InputError("cannot serialize nan")
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def decode_float(v) -> float:
    if isinstance(v, str):
        if v not in ("inf", "-inf"):
            raise InputError(f"bad float literal {v!r}")
        return float(v)
    return float(v)


def dumps(obj) -> str:
    """Compact JSON with a trailing newline; the same object always gives the same bytes."""
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def forest_to_dict(forest: QuickShiftForest, d: int, h: Optional[float], kernel: Optional[str]) -> dict:
    return {
        "n": forest.n,
        "d": int(d),
        "h": None if h is None else encode_float(h),
        "tau": encode_float(forest.tau),
        "kernel": kernel,
        "parents": forest.parents(),
        "density": [encode_float(v) for v in forest.density],
        "roots": [int(r) for r in forest.roots],
        "assignments": [int(a) for a in assignments(forest)],
    }


def forest_from_dict(obj: dict, samples) -> QuickShiftForest:
    """Rebuild a forest from its JSON form; ``samples`` supply the edge lengths."""
    x = as_points(samples, "samples")
    try:
        parents = obj["parents"]
        density = np.array([decode_float(v) for v in obj["density"]], dtype=np.float64)
        tau = decode_float(obj["tau"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed forest JSON: {exc}") from None
    n = len(parents)
    if x.shape[0] != n or density.shape[0] != n:
        raise InputError("forest JSON does not match the samples")
    parent = np.array([-1 if p is None else int(p) for p in parents], dtype=np.intp)
    length = np.full(n, np.nan)
    child = np.flatnonzero(parent >= 0)
    for i in child:
        length[i] = math.sqrt(sq_distances(x[i:i + 1], x[parent[i]:parent[i] + 1])[0, 0])
    for arr in (parent, density, length):
        arr.flags.writeable = False
    return QuickShiftForest(parent=parent, density=density, tau=tau, edge_length=length)


def tree_to_dict(tree: ClusterTree) -> dict:
    return {
        "tau": encode_float(tree.tau),
        "levels": [{"level": encode_float(lc.level), "components": lc.components} for lc in tree.iter_levels()],
    }


def tree_from_dict(obj: dict) -> ClusterTree:
    try:
        levels = [LevelComponents(decode_float(lv["level"]), [[int(i) for i in c] for c in lv["components"]])
                  for lv in obj["levels"]]
        tau = decode_float(obj["tau"])
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed tree JSON: {exc}") from None
    return ClusterTree.from_levels(levels, tau)


def modal_to_dict(results: list[ConditionalModeResult]) -> dict:
    return {
        "queries": [
            {"x": [encode_float(v) for v in r.x], "modes": [encode_float(v) for v in r.mode_estimates]}
            for r in results
        ]
    }
