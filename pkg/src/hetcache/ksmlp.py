"""Knapsack Storage + Match Least Popular (KS+MLP), for Zipf beta > 1."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from hetcache.popularity import PopularityModel, RequestBatch, build_popularity, make_rng
from hetcache.system import DeliveryReport, PlacementMap, StorageProfile, SystemConfig

DEFAULT_DELTA = 0.5


class UnsupportedRegime(ValueError):
    """The policy is only defined for lopsided popularity (beta > 1)."""


def _ceil(x: float) -> int:
    # 1/delta + 1 and friends should not round up on representation noise
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class KnapsackInstance:
    values: tuple[float, ...]
    weights: tuple[float, ...]
    capacity: float

    def __post_init__(self):
        if len(self.values) != len(self.weights):
            raise ValueError("values and weights differ in length")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")
        if self.capacity < 0:
            raise ValueError("capacity must be non-negative")


@dataclass(frozen=True)
class KnapsackSolution:
    x: tuple[float, ...]
    objective: float

    @property
    def selected(self) -> frozenset[int]:
        """R = {i : x_i = 1}, 1-based."""
        return frozenset(i for i, xi in enumerate(self.x, start=1) if xi == 1.0)


def solve_fractional_knapsack(inst: KnapsackInstance) -> KnapsackSolution:
    """Greedy by value density; ties go to the lower (more popular) index.

    Items are taken whole until one no longer fits; that item is taken
    fractionally and the scan stops.
    """
    n = len(inst.values)
    order = sorted(range(n), key=lambda i: (-(inst.values[i] / inst.weights[i]), i))
    x = [0.0] * n
    room = float(inst.capacity)
    for i in order:
        w = inst.weights[i]
        if w <= room:
            x[i] = 1.0
            room -= w
        else:
            x[i] = room / w
            break
    objective = math.fsum(xi * v for xi, v in zip(x, inst.values))
    return KnapsackSolution(tuple(x), objective)


def request_probabilities(model: PopularityModel, batch_size: int) -> np.ndarray:
    """v_i = 1 - (1 - p_i)^batch_size, the chance file i is requested at least once."""
    if batch_size == 0:
        return np.zeros(model.n)
    with np.errstate(divide="ignore"):
        return -np.expm1(batch_size * np.log1p(-model.pmf))


def popularity_thresholds(config: SystemConfig, model: PopularityModel, delta: float) -> tuple[int, int]:
    """(n1, n2) of the weight rule, clamped to [1, n] with n1 <= n2."""
    m, beta, n = config.m, config.beta, config.n
    log_m = math.log(m)
    n1 = math.floor((config.batch_size * model.p1) ** (1 / beta) / log_m ** (2 / beta))
    n2 = math.floor(m ** ((1 + delta) / beta))
    n2 = min(max(n2, 1), n)
    n1 = min(max(n1, 1), n2)
    return n1, n2


def ks_weights(config: SystemConfig, delta: float = DEFAULT_DELTA,
               model: PopularityModel | None = None) -> list[int]:
    """Replication count w_i for every file (index 0 holds w_1)."""
    if config.beta <= 1:
        raise UnsupportedRegime(f"KS+MLP needs beta > 1, got beta={config.beta}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if config.m < 2:
        raise ValueError("KS+MLP needs at least two caches (log m appears in the weights)")
    model = model or build_popularity(config.n, config.beta)
    m, mt, p1 = config.m, config.batch_size, model.p1
    n1, n2 = popularity_thresholds(config, model, delta)
    mid = _ceil(4 * p1 * math.log(m) ** 2)
    tail = _ceil(1 / delta + 1)
    w = [m]
    for i in range(2, config.n + 1):
        if i <= n1:
            w.append(_ceil((1 + p1 / 2) * mt * model.p(i)))
        elif i <= n2:
            w.append(mid)
        else:
            w.append(tail)
    return w


def ks_select(config: SystemConfig, model: PopularityModel, weights) -> KnapsackSolution:
    values = request_probabilities(model, config.batch_size)
    inst = KnapsackInstance(tuple(values.tolist()), tuple(float(w) for w in weights), config.M)
    return solve_fractional_knapsack(inst)


def ks_place(solution: KnapsackSolution, weights, profile: StorageProfile) -> PlacementMap:
    """Round-robin placement of the sorted copy list.

    Copies of each selected file (x_i = 1) are listed in ascending file
    order; each goes to the next cache, cyclically after the previous
    placement, that has a free slot and does not hold that file yet. A copy
    that fits nowhere is dropped and counted in ``placement.dropped``.
    """
    m = profile.m
    pm = PlacementMap(profile.capacities, len(weights))
    free = list(profile.capacities)
    open_caches = list(range(m))  # 0-based, ascending, caches with a free slot
    ptr = 0
    for i in sorted(solution.selected):
        for _ in range(int(weights[i - 1])):
            if not open_caches:
                pm.dropped += 1
                continue
            start = bisect.bisect_left(open_caches, ptr) % len(open_caches)
            for step in range(len(open_caches)):
                s = open_caches[(start + step) % len(open_caches)]
                if i not in pm.files_on(s + 1):
                    break
            else:
                pm.dropped += 1
                continue
            pm.add(i, s + 1)
            free[s] -= 1
            if free[s] == 0:
                open_caches.remove(s)
            ptr = (s + 1) % m
    return pm.freeze()


def ksmlp_placement(config: SystemConfig, profile: StorageProfile, model: PopularityModel,
                    delta: float = DEFAULT_DELTA) -> PlacementMap:
    profile.check_against(config)
    weights = ks_weights(config, delta, model)
    return ks_place(ks_select(config, model, weights), weights, profile)


def mlp_deliver(batch: RequestBatch, placement: PlacementMap, model: PopularityModel,
                seed: int) -> DeliveryReport:
    """Match Least Popular: serve files from index n down to 1.

    If file i has more requests than idle caches holding it, all of its
    requests go to the central server; otherwise they are matched to idle
    replicas chosen uniformly at random (partial Fisher-Yates on the idle
    replica list).
    """
    rng = make_rng(seed)
    positions: dict[int, list[int]] = {}
    for r, f in enumerate(batch.requests.tolist()):
        positions.setdefault(f, []).append(r)
    idle = [True] * (placement.m + 1)
    matching = {}
    for i in sorted(positions, reverse=True):
        reqs = positions[i]
        pool = [s for s in placement.caches_of(i) if idle[s]]
        if len(reqs) > len(pool):
            continue
        for j in range(len(reqs)):
            k = j + int(rng.integers(len(pool) - j))
            pool[j], pool[k] = pool[k], pool[j]
        for r, s in zip(reqs, pool):
            matching[r] = s
            idle[s] = False
    return DeliveryReport.from_matching(batch.requests.tolist(), matching)


def ksmlp_run(config: SystemConfig, profile: StorageProfile, model: PopularityModel,
              batch: RequestBatch, delta: float = DEFAULT_DELTA, seed: int = 0) -> DeliveryReport:
    placement = ksmlp_placement(config, profile, model, delta)
    return mlp_deliver(batch, placement, model, seed)
