"""Acceptance experiments on the synthetic catalog.

Each criterion is a function ``run(seeds) -> CriterionResult``.  Seed counts
are configurable; pass thresholds scale with them (for example "18 of 20"
becomes ``ceil(0.9 * seeds)``).  The same functions back ``modeforest bench``
and the acceptance tests.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._util import THREADS_ENV
from .analysis import certify_separation_1d, hausdorff
from .cluster_tree import level_subgraph, link, merge_height, tree_from_forest
from .kernels import KERNELS, DensityModel, kde_evaluate, kde_self_evaluate
from .modal_regression import modal_regression
from .quickshift import build_forest, quickshift, tau_schedule
from .synthetic import catalog_entry, saddle_level_1d, true_modes
from . import verify

__all__ = ["CriterionResult", "CRITERIA", "SUITES", "run_suite"]

DEFAULT_SEEDS = 20


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float = 0.0
    limit_seconds: float | None = None
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.name} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": bool(self.passed),
            "seconds": round(self.seconds, 3),
            "limit_seconds": self.limit_seconds,
            "details": self.details,
        }


def _need(fraction: float, seeds: int) -> int:
    return int(math.ceil(fraction * seeds - 1e-9))


def _timed(number, name, limit, fn, *args) -> CriterionResult:
    t0 = time.perf_counter()
    passed, details = fn(*args)
    dt = time.perf_counter() - t0
    within = limit is None or dt < limit
    if not within:
        details["runtime_exceeded"] = True
    return CriterionResult(number, name, bool(passed and within), dt, limit, details)


# -- 1 and 2: oracle equivalence and forest invariants ----------------------------

def _random_instance(rng: np.random.Generator):
    d = int(rng.integers(1, 4))
    n = int(rng.integers(1, 301)) if rng.random() < 0.1 else int(rng.integers(1, 121))
    x = rng.normal(size=(n, d))
    if rng.random() < 0.3:
        # coarse grid: exact duplicates and distance ties
        x = np.round(x * 2) / 2
    kernel = str(rng.choice(sorted(KERNELS)))
    h = float(rng.uniform(0.2, 1.5))
    tau = math.inf if rng.random() < 0.15 else float(rng.uniform(0.05, 2.0))
    return x, kernel, h, tau, d


def _oracle_equivalence(instances: int, seed: int = 12345):
    rng = np.random.default_rng(seed)
    kde_worst = 0.0
    failures = []
    invariant_failures = []
    for k in range(instances):
        x, kernel, h, tau, d = _random_instance(rng)
        model = DensityModel(kernel, h, d)
        fast = kde_self_evaluate(model, x)
        slow = verify.naive_kde(model, x, x)
        err = float(np.max(np.abs(fast - slow)))
        kde_worst = max(kde_worst, err)
        if err > 1e-12:
            failures.append((k, "kde", err))
        dens = fast
        if rng.random() < 0.3:
            dens = np.round(fast, 2)  # force density ties
        forest = build_forest(x, dens, tau)
        if forest.parents() != verify.naive_parents(x, dens, tau):
            failures.append((k, "forest"))
        if x.shape[0] > 1 and not np.array_equal(forest.parent, build_forest(x, dens, tau, method="kdtree").parent):
            failures.append((k, "forest-kdtree"))
        try:
            verify.check_forest(forest, x)
        except Exception as exc:  # noqa: BLE001 - reported, not swallowed
            invariant_failures.append((k, str(exc)))
        lam = float(np.quantile(dens, rng.uniform(0, 1))) - 1e-12
        comps = level_subgraph(forest, lam).components
        delta = float(rng.uniform(0.05, 1.5))
        if link(comps, x, delta) != verify.naive_components(x, comps, delta):
            failures.append((k, "link"))
    return failures, invariant_failures, kde_worst


def criterion_1_2(instances: int = 200):
    t0 = time.perf_counter()
    failures, inv, worst = _oracle_equivalence(instances)
    dt = time.perf_counter() - t0
    r1 = CriterionResult(1, "oracle equivalence", not failures and dt < 120, dt, 120,
                         {"instances": instances, "max_kde_error": worst, "failures": failures[:20]})
    r2 = CriterionResult(2, "forest invariants", not inv, 0.0, None,
                         {"instances": instances, "failures": inv[:20]})
    return [r1, r2]


# -- 3: mode recovery ---------------------------------------------------------------

def _mode_error(entry, n, seed, tau):
    x = entry.sample(n, seed)
    model = DensityModel("gaussian", n ** -0.2, 1)
    forest = quickshift(x, model, tau)
    est = x[forest.roots, 0]
    return len(est), hausdorff(est, np.array(entry.modes))


def _mode_recovery(seeds: int):
    entry = catalog_entry("two-gaussian-10sep")
    ok = 0
    for s in range(seeds):
        count, err = _mode_error(entry, 4000, s, 1.0)
        ok += count == 2 and err < 0.25
    med = {}
    for n in (1000, 16000):
        med[n] = float(np.median([_mode_error(entry, n, s, 1.0)[1] for s in range(seeds)]))
    ratio = med[16000] / med[1000]
    need = _need(0.9, seeds)
    details = {"n4000_successes": ok, "needed": need, "median_hausdorff_n1000": med[1000],
               "median_hausdorff_n16000": med[16000], "ratio": ratio}
    return ok >= need and ratio < 0.7, details


# -- 4: segmentation ----------------------------------------------------------------

def _segmentation(seeds: int):
    entry = catalog_entry("major-minor-bump")
    n = 4000
    small = large = 0
    for s in range(seeds):
        x = entry.sample(n, s)
        dens = kde_self_evaluate(DensityModel("gaussian", n ** -0.2, 1), x)
        small += build_forest(x, dens, 0.5).roots.size == 2
        large += build_forest(x, dens, 2.5).roots.size == 1
    need = _need(0.8, seeds)
    return small >= need and large >= need, {"tau0.5_two_roots": small, "tau2.5_one_root": large, "needed": need}


# -- 5: separation implies no directed path -------------------------------------------

def _cross_paths(forest, left: np.ndarray, right: np.ndarray) -> int:
    """Number of ordered (a, b) pairs on opposite sides with a directed path a -> b."""
    side = np.zeros(forest.n, dtype=np.int8)
    side[left] = 1
    side[right] = 2
    count = 0
    for a in np.flatnonzero(side > 0):
        node = forest.parent[a]
        while node >= 0:
            if side[node] and side[node] != side[a]:
                count += 1
            node = forest.parent[node]
    return count


def _separation(seeds: int):
    entry = catalog_entry("two-gaussian-10sep")
    m = entry.density
    n, tau, r_s = 400, 0.45, 1.0
    sup_s = float(m(np.array([4.0, 6.0])).max())
    inf_b = float(m(np.array([1.0, 9.0])).min())
    delta = 0.5 * (inf_b - sup_s)
    cert = certify_separation_1d(m, 0.0, 10.0, [5.0], r_s, delta, 1e-4)
    violations = 0
    valid_seeds = 0
    for s in range(seeds):
        x = entry.sample(n, s)
        forest = quickshift(x, DensityModel("gaussian", n ** -0.2, 1), tau)
        left = np.flatnonzero(x[:, 0] < 5.0)
        right = np.flatnonzero(x[:, 0] > 5.0)
        v = _cross_paths(forest, left, right)
        violations += v
        valid_seeds += v == 0
    details = {"certificate_valid": cert.valid, "delta": delta, "slack": cert.slack,
               "violating_paths": violations, "clean_seeds": valid_seeds, "seeds": seeds}
    return cert.valid and tau < r_s / 2 and violations == 0, details


# -- 6: cluster tree ------------------------------------------------------------------

def _component_interval(m, lam: float, mode: float, step: float = 1e-4):
    """Connected component of ``{f >= lam}`` containing ``mode`` on the line."""
    lo = hi = mode
    while m(np.array([lo - step]))[0] >= lam:
        lo -= step
    while m(np.array([hi + step]))[0] >= lam:
        hi += step
    return lo, hi


def _labels_at(forest, x, level, tau):
    comps = link(level_subgraph(forest, level).components, x, tau)
    lab = np.full(x.shape[0], -1)
    for k, c in enumerate(comps):
        lab[c] = k
    return lab


def _tree_run(m, modes, peaks, mu, n, seed, minimality_intervals, separation_intervals):
    x = m.sample(n, seed)
    tau = tau_schedule(n, 1)
    forest = quickshift(x, DensityModel("gaussian", 2.0 * n ** -0.2, 1), tau)
    t = x[:, 0]
    minimal = True
    cache: dict = {}
    for peak, (a, b) in zip(peaks, minimality_intervals):
        lam = 0.6 * peak
        if lam not in cache:
            cache[lam] = _labels_at(forest, x, lam - 0.1 * lam, tau)
        got = cache[lam][(t >= a) & (t <= b)]
        if got.size and (got.min() < 0 or np.unique(got).size != 1):
            minimal = False
    lab = _labels_at(forest, x, 1.15 * mu, tau)
    separated = True
    for (a1, b1), (a2, b2) in zip(separation_intervals, separation_intervals[1:]):
        s1 = set(lab[(t >= a1) & (t <= b1)].tolist()) - {-1}
        s2 = set(lab[(t >= a2) & (t <= b2)].tolist()) - {-1}
        if s1 & s2:
            separated = False
    tree = tree_from_forest(forest, x, tau)
    i = int(np.argmin(np.abs(t - modes[0])))
    j = int(np.argmin(np.abs(t - modes[1])))
    return minimal, separated, merge_height(tree, i, j)


def _cluster_tree(seeds: int):
    m = catalog_entry("trimodal").density
    modes = true_modes(m, ([-4.0], [14.0]), 0.01)[:, 0]
    peaks = m(modes)
    mu = saddle_level_1d(m, modes[0], modes[1])
    mini = [_component_interval(m, 0.6 * p, md) for p, md in zip(peaks, modes)]
    sepi = [_component_interval(m, 1.15 * mu, md) for md in modes]
    runs = [_tree_run(m, modes, peaks, mu, 4000, s, mini, sepi) for s in range(seeds)]
    n_min = sum(r[0] for r in runs)
    n_sep = sum(r[1] for r in runs)
    mh_seeds = max(1, seeds // 2)
    mh4000 = float(np.median([r[2] for r in runs[:mh_seeds]]))
    rel = {}
    for n in (500, 8000):
        hs = np.array([_tree_run(m, modes, peaks, mu, n, s, mini, sepi)[2] for s in range(mh_seeds)])
        rel[n] = float(np.median(np.abs(hs - mu)) / mu)
    need = _need(0.9, seeds)
    mh_ok = abs(mh4000 - mu) / mu <= 0.25
    details = {"minimality": n_min, "separation": n_sep, "needed": need, "saddle_level": mu,
               "median_merge_height_n4000": mh4000, "relative_error_n4000": abs(mh4000 - mu) / mu,
               "median_relative_error_n500": rel[500], "median_relative_error_n8000": rel[8000]}
    return n_min >= need and n_sep >= need and mh_ok and rel[8000] < rel[500], details


# -- 7: modal regression --------------------------------------------------------------

_QUERIES = (0.25, 0.5, 0.75)


def _modal_errors(entry, n, seed):
    z = entry.sample(n, seed)
    model = DensityModel("gaussian", n ** (-1 / 6), 2)
    truth = np.array(entry.modes)
    return [hausdorff(modal_regression(z, model, 0.5, [q]).mode_estimates, truth) for q in _QUERIES]


def _modal_regression(seeds: int):
    entry = catalog_entry("bimodal-conditional")
    errs = np.array([_modal_errors(entry, 6000, s) for s in range(seeds)])
    per_query = (errs < 0.3).sum(axis=0)
    need = _need(0.8, seeds)
    med = {n: float(np.median([_modal_errors(entry, n, s) for s in range(seeds)])) for n in (1000, 8000)}
    details = {"successes_per_query": dict(zip(map(str, _QUERIES), per_query.tolist())), "needed": need,
               "median_error_n1000": med[1000], "median_error_n8000": med[8000]}
    return bool(np.all(per_query >= need)) and med[8000] < med[1000], details


# -- 8: KDE sup-norm -------------------------------------------------------------------

def _kde_sup(seeds: int):
    m = catalog_entry("major-minor-bump").density
    grid = np.linspace(-1.5, 3.0, 901)
    truth = m(grid)
    med = {}
    for n in (500, 16000):
        errs = []
        for s in range(seeds):
            x = m.sample(n, s)
            est = kde_evaluate(DensityModel("gaussian", n ** -0.2, 1), x, grid.reshape(-1, 1))
            errs.append(float(np.max(np.abs(est - truth))))
        med[n] = float(np.median(errs))
    return med[16000] < med[500], {"median_sup_error_n500": med[500], "median_sup_error_n16000": med[16000]}


# -- 9: determinism --------------------------------------------------------------------

def _determinism(seeds: int):
    from . import cli

    x = catalog_entry("two-gaussian-10sep").sample(2000, 3)
    outputs = {}
    old = os.environ.get(THREADS_ENV)
    try:
        with tempfile.TemporaryDirectory() as tmp:
            src = os.path.join(tmp, "in.csv")
            np.savetxt(src, x, delimiter=",", fmt="%.17g")
            for label, threads in (("a", "1"), ("b", "1"), ("c", "4")):
                os.environ[THREADS_ENV] = threads
                out = os.path.join(tmp, f"{label}.json")
                code = cli.main(["quickshift", src, "--h", "0.3", "--tau", "1", "--out", out])
                with open(out, "rb") as fh:
                    outputs[label] = (code, fh.read())
    finally:
        if old is None:
            os.environ.pop(THREADS_ENV, None)
        else:
            os.environ[THREADS_ENV] = old
    codes = [c for c, _ in outputs.values()]
    same_run = outputs["a"][1] == outputs["b"][1]
    same_threads = outputs["a"][1] == outputs["c"][1]
    return all(c == 0 for c in codes) and same_run and same_threads, {
        "repeat_identical": same_run, "threads_1_vs_4_identical": same_threads, "exit_codes": codes}


# -- registry ---------------------------------------------------------------------------

def _single(number, name, limit, fn):
    return lambda seeds: [_timed(number, name, limit, fn, seeds)]


CRITERIA: dict[int, Callable[[int], list[CriterionResult]]] = {
    1: lambda seeds: criterion_1_2(),
    3: _single(3, "mode recovery", 300, _mode_recovery),
    4: _single(4, "segmentation", 180, _segmentation),
    5: _single(5, "separation implies no directed path", 120, _separation),
    6: _single(6, "cluster tree minimality, separation, merge height", 300, _cluster_tree),
    7: _single(7, "modal regression", 300, _modal_regression),
    8: _single(8, "KDE sup-norm trend", 120, _kde_sup),
    9: _single(9, "determinism", None, _determinism),
}

SUITES: dict[str, tuple[int, ...]] = {
    "all": (1, 3, 4, 5, 6, 7, 8, 9),
    "oracles": (1,),
    "modes": (3,),
    "segmentation": (4,),
    "separation": (5,),
    "tree": (6,),
    "modalreg": (7,),
    "kde": (8,),
    "determinism": (9,),
}


def run_suite(name: str = "all", seeds: int = DEFAULT_SEEDS, progress: Callable[[str], None] | None = None):
    """Run a named suite and return its results in criterion order."""
    if name not in SUITES:
        raise KeyError(name)
    out = []
    for number in SUITES[name]:
        for res in CRITERIA[number](seeds):
            out.append(res)
            if progress is not None:
                progress(res.line())
    return out
