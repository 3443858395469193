"""Error metrics and separation certificates against a known density."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._util import InputError, sq_distances

__all__ = [
    "hausdorff",
    "MatchReport",
    "match_modes",
    "SeparationCertificate",
    "certify_separation_1d",
    "check_separation_inequality",
]


def _as_set(a, name: str) -> np.ndarray:
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim <= 1:
        arr = arr.reshape(-1, 1)
    if arr.shape[0] == 0:
        raise InputError(f"{name} is empty")
    return arr


def hausdorff(a, b) -> float:
    """Hausdorff distance between two finite point sets."""
    a = _as_set(a, "first set")
    b = _as_set(b, "second set")
    if a.shape[1] != b.shape[1]:
        raise InputError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    dist = np.sqrt(sq_distances(a, b))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


@dataclass
class MatchReport:
    pairs: list = field(default_factory=list)  # (estimated index, truth index, distance)
    unmatched_estimated: list = field(default_factory=list)
    unmatched_truth: list = field(default_factory=list)

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)


def match_modes(estimated, truth, radius: float) -> MatchReport:
    """Greedy one-to-one matching of estimated to true modes within ``radius``.

    Candidate pairs are taken in order of increasing distance (ties by
    estimated index, then truth index); each point is used at most once.
    """
    if not radius > 0:
        raise InputError(f"radius must be positive, got {radius}")
    est = np.asarray(estimated, dtype=np.float64)
    tru = np.asarray(truth, dtype=np.float64)
    est = est.reshape(-1, 1) if est.ndim <= 1 else est
    tru = tru.reshape(-1, 1) if tru.ndim <= 1 else tru
    if est.shape[0] and tru.shape[0] and est.shape[1] != tru.shape[1]:
        raise InputError(f"dimension mismatch: {est.shape[1]} vs {tru.shape[1]}")
    report = MatchReport()
    if est.shape[0] and tru.shape[0]:
        dist = np.sqrt(sq_distances(est, tru))
        cand = [(dist[i, j], i, j) for i in range(est.shape[0]) for j in range(tru.shape[0]) if dist[i, j] <= radius]
        cand.sort()
        used_e: set[int] = set()
        used_t: set[int] = set()
        for d, i, j in cand:
            if i in used_e or j in used_t:
                continue
            used_e.add(i)
            used_t.add(j)
            report.pairs.append((i, j, float(d)))
    matched_e = {p[0] for p in report.pairs}
    matched_t = {p[1] for p in report.pairs}
    report.unmatched_estimated = [i for i in range(est.shape[0]) if i not in matched_e]
    report.unmatched_truth = [j for j in range(tru.shape[0]) if j not in matched_t]
    return report


@dataclass(frozen=True)
class SeparationCertificate:
    x1: object
    x2: object
    separator: tuple
    r_s: float
    delta: float
    valid: bool
    separator_sup: float = math.nan
    ball_inf: float = math.nan
    slack: float = math.nan
    path_premise: str = "verified"
    reason: str = ""


def _lipschitz(density, lipschitz: Optional[float]) -> float:
    if lipschitz is not None:
        return float(lipschitz)
    bound = getattr(density, "lipschitz_bound", None)
    if bound is None:
        raise InputError("density has no lipschitz_bound(); pass lipschitz= explicitly")
    return float(bound())


def _interval_grid(lo: float, hi: float, step: float) -> np.ndarray:
    k = max(1, int(math.ceil((hi - lo) / step)))
    return np.linspace(lo, hi, k + 1)


def certify_separation_1d(density: Callable, x1: float, x2: float, separator: Sequence[float],
                          r_s: float, delta: float, grid_step: float,
                          lipschitz: Optional[float] = None) -> SeparationCertificate:
    """Certify that ``x1`` and ``x2`` are separated by a valley on the real line.

    The certificate is valid when ``separator`` meets the open interval between
    the points (in one dimension that interval is contained in every path) and

        sup f over separator + [-r_s, r_s]  <  inf f over [x1 +- r_s] and [x2 +- r_s]  -  delta

    holds after widening both grid extrema by ``L * grid_step``, where ``L``
    bounds ``|f'|``.
    """
    if not (r_s > 0 and delta > 0 and grid_step > 0):
        raise InputError("r_s, delta and grid_step must be positive")
    x1, x2 = float(x1), float(x2)
    sep = tuple(float(s) for s in np.atleast_1d(separator))
    lo, hi = min(x1, x2), max(x1, x2)
    base = dict(x1=x1, x2=x2, separator=sep, r_s=float(r_s), delta=float(delta))
    if not any(lo < s < hi for s in sep):
        return SeparationCertificate(**base, valid=False,
                                     reason="separator does not intersect the open interval between the points")
    lip = _lipschitz(density, lipschitz)

    sep_grid = np.concatenate([_interval_grid(s - r_s, s + r_s, grid_step) for s in sep])
    ball_grid = np.concatenate([_interval_grid(x - r_s, x + r_s, grid_step) for x in (x1, x2)])
    sup_sep = float(np.max(density(sep_grid)))
    inf_ball = float(np.min(density(ball_grid)))
    slack = (inf_ball - lip * grid_step - delta) - (sup_sep + lip * grid_step)
    valid = slack > 0
    reason = "" if valid else "valley is not deep enough at this delta"
    return SeparationCertificate(**base, valid=bool(valid), separator_sup=sup_sep,
                                 ball_inf=inf_ball, slack=float(slack), reason=reason)


def _ball_grid(centre: np.ndarray, r: float, step: float) -> np.ndarray:
    axes = [_interval_grid(c - r, c + r, step) for c in centre]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, centre.shape[0])
    keep = np.sum((mesh - centre) ** 2, axis=1) <= r * r
    return mesh[keep]


def check_separation_inequality(density: Callable, x1, x2, separator, r_s: float, delta: float,
                                grid_step: float, lipschitz: Optional[float] = None) -> SeparationCertificate:
    """Density-gap half of the separation condition in any dimension.

    Only the inequality is checked (on cubic grids clipped to the balls, with
    the same Lipschitz widening as the 1-D certificate).  That ``separator``
    meets every path between the points is taken on trust and reported as
    ``path_premise="assumed"``.
    """
    if not (r_s > 0 and delta > 0 and grid_step > 0):
        raise InputError("r_s, delta and grid_step must be positive")
    p1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
    p2 = np.atleast_1d(np.asarray(x2, dtype=np.float64))
    sep = np.asarray(separator, dtype=np.float64).reshape(-1, p1.shape[0])
    lip = _lipschitz(density, lipschitz)
    sep_pts = np.concatenate([_ball_grid(s, r_s, grid_step) for s in sep])
    ball_pts = np.concatenate([_ball_grid(p, r_s, grid_step) for p in (p1, p2)])
    sup_sep = float(np.max(density(sep_pts)))
    inf_ball = float(np.min(density(ball_pts)))
    # grid spacing in the sup norm is grid_step, so Euclidean gaps are sqrt(d) * step
    widen = lip * grid_step * math.sqrt(p1.shape[0])
    slack = (inf_ball - widen - delta) - (sup_sep + widen)
    return SeparationCertificate(
        x1=tuple(p1), x2=tuple(p2), separator=tuple(map(tuple, sep)), r_s=float(r_s),
        delta=float(delta), valid=bool(slack > 0), separator_sup=sup_sep, ball_inf=inf_ball,
        slack=float(slack), path_premise="assumed",
        reason="" if slack > 0 else "valley is not deep enough at this delta",
    )
