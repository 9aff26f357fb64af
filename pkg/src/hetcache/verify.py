"""Oracle cross-checks behind ``hetcache verify``.

Each suite draws random small instances from a fixed seed and compares
the production routine with an exhaustive one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from hetcache.ksmlp import KnapsackInstance, solve_fractional_knapsack
from hetcache.matching import (
    BipartiteGraph,
    brute_force_max_matching,
    check_matching,
    max_matching,
)
from hetcache.popularity import build_popularity, make_rng


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: int
    failed: int
    first_failure: str = ""

    @property
    def ok(self) -> bool:
        return self.failed == 0


def random_graph(rng: np.random.Generator, max_left: int = 8, max_right: int = 8) -> BipartiteGraph:
    nl = int(rng.integers(0, max_left + 1))
    nr = int(rng.integers(1, max_right + 1))
    density = rng.random()
    mask = rng.random((nl, nr)) < density
    adj = tuple(tuple(int(s) + 1 for s in np.flatnonzero(row)) for row in mask)
    return BipartiteGraph(adj, nr)


def matching_suite(instances: int = 500, seed: int = 2024) -> SuiteResult:
    rng = make_rng(seed)
    passed = failed = 0
    note = ""
    for t in range(instances):
        g = random_graph(rng)
        m = max_matching(g)
        try:
            check_matching(g, m)
            good = len(m) == brute_force_max_matching(g)
        except AssertionError:
            good = False
        if good:
            passed += 1
        else:
            failed += 1
            note = note or f"instance {t}: {g.adj}"
    return SuiteResult("matching", passed, failed, note)


_SUBSETS: dict[int, np.ndarray] = {}


def _subsets(k: int) -> np.ndarray:
    if k not in _SUBSETS:
        _SUBSETS[k] = np.array(list(itertools.product((0, 1), repeat=k)), dtype=float).reshape(-1, k)
    return _SUBSETS[k]


def knapsack_lp_optimum(inst: KnapsackInstance) -> float:
    """LP optimum by enumerating basic solutions.

    A basic optimum of the fractional knapsack LP has at most one
    fractional item, so it is a whole subset S plus possibly part of one
    item j outside S.
    """
    v = np.array(inst.values, dtype=float)
    w = np.array(inst.weights, dtype=float)
    if len(v) == 0:
        return 0.0
    S = _subsets(len(v))
    wS, vS = S @ w, S @ v
    fits = wS <= inst.capacity + 1e-12
    best = vS[fits].max()
    room = np.clip(inst.capacity - wS, 0.0, None)
    for j in range(len(v)):
        ok = fits & (S[:, j] == 0)
        if ok.any():
            frac = np.minimum(1.0, room[ok] / w[j])
            best = max(best, float((vS[ok] + frac * v[j]).max()))
    return float(best)


def random_knapsack(rng: np.random.Generator, max_items: int = 12) -> KnapsackInstance:
    k = int(rng.integers(0, max_items + 1))
    values = rng.uniform(0.0, 1.0, k)
    weights = rng.uniform(0.05, 5.0, k)
    if k and rng.random() < 0.3:  # integer weights produce exact ties
        weights = rng.integers(1, 6, k).astype(float)
        values = rng.integers(0, 6, k).astype(float)
    capacity = float(rng.uniform(0.0, weights.sum() + 1.0))
    return KnapsackInstance(tuple(values.tolist()), tuple(weights.tolist()), capacity)


def knapsack_suite(instances: int = 500, seed: int = 2025, tol: float = 1e-9) -> SuiteResult:
    rng = make_rng(seed)
    passed = failed = 0
    note = ""
    for t in range(instances):
        inst = random_knapsack(rng)
        got = solve_fractional_knapsack(inst).objective
        want = knapsack_lp_optimum(inst)
        if abs(got - want) <= tol * max(1.0, abs(want)):
            passed += 1
        else:
            failed += 1
            note = note or f"instance {t}: greedy {got!r} vs optimum {want!r}"
    return SuiteResult("knapsack", passed, failed, note)


def pmf_suite(tol: float = 1e-12) -> SuiteResult:
    passed = failed = 0
    note = ""
    for n in (1, 2, 3, 10, 400, 2000, 10**5):
        for beta in (0.0, 0.3, 0.8, 1.0, 1.2, 2.0, 3.5):
            model = build_popularity(n, beta)
            total = math.fsum(model.pmf.tolist())
            good = (abs(total - 1.0) <= tol and model.cdf[-1] == 1.0
                    and bool(np.all(np.diff(model.pmf) <= 0)))
            if good:
                passed += 1
            else:
                failed += 1
                note = note or f"n={n}, beta={beta}: sum={total!r}"
    return SuiteResult("pmf", passed, failed, note)


def run_all(instances: int = 500) -> list[SuiteResult]:
    return [matching_suite(instances), knapsack_suite(instances), pmf_suite()]
