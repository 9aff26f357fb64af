"""Proportional Placement and Maximum Matching (PPMM)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hetcache.matching import build_request_graph, max_matching
from hetcache.popularity import PopularityModel, RequestBatch
from hetcache.system import (
    DeliveryReport,
    PlacementError,
    PlacementMap,
    StorageProfile,
    SystemConfig,
)


@dataclass(frozen=True)
class ReplicationPlan:
    copies: tuple[int, ...]  # copies[i - 1] = d_i

    def d(self, i: int) -> int:
        return self.copies[i - 1]

    @property
    def total(self) -> int:
        return sum(self.copies)


def ppmm_replication(model: PopularityModel, config: SystemConfig) -> ReplicationPlan:
    """d_i = M * p_i rounded to nearest and capped at m, repaired to sum to min(M, n*m).

    The repair walks files in passes, one copy per eligible file per pass:
    deficits go to the most popular files first, surpluses come off the
    least popular first.
    """
    M, m, n = config.M, config.m, model.n
    d = [min(max(math.floor(M * p + 0.5), 0), m) for p in model.pmf.tolist()]
    target = min(M, n * m)
    total = sum(d)
    while total < target:
        for i in range(n):
            if total == target:
                break
            if d[i] < m:
                d[i] += 1
                total += 1
    while total > target:
        for i in reversed(range(n)):
            if total == target:
                break
            if d[i] > 0:
                d[i] -= 1
                total -= 1
    return ReplicationPlan(tuple(d))


def _shift_in(file: int, holds: list[set[int]], free: list[int]) -> bool:
    """Make room for one more copy of ``file`` by moving other copies along a chain.

    Breadth-first search over caches: start from caches lacking ``file``;
    from cache u, any file g on u may move to a cache v lacking g. The
    search stops at a cache with a free slot, then each file on the path
    moves one step. This is an augmenting path of the placement flow, so
    it exists whenever a duplicate-free placement with one more copy does.
    """
    m = len(holds)
    parent: dict[int, tuple[int, int] | None] = {}
    queue = []
    for u in range(m):
        if file not in holds[u]:
            parent[u] = None
            queue.append(u)
    head = 0
    end = -1
    while head < len(queue) and end < 0:
        u = queue[head]
        head += 1
        if free[u] > 0:
            end = u
            break
        for g in sorted(holds[u]):
            for v in range(m):
                if v not in parent and g not in holds[v]:
                    parent[v] = (u, g)
                    if free[v] > 0:
                        end = v
                        break
                    queue.append(v)
            if end >= 0:
                break
    if end < 0:
        return False
    v = end
    free[v] -= 1
    while parent[v] is not None:
        u, g = parent[v]
        holds[u].remove(g)
        holds[v].add(g)
        v = u
    holds[v].add(file)
    return True


def ppmm_place(plan: ReplicationPlan, profile: StorageProfile) -> PlacementMap:
    """Place d_i copies of every file, no cache holding a file twice.

    Slots above the smallest capacity are filled first, cache by cache in
    profile order: each cache takes the files with the most copies still
    unplaced (ties to the lower index). That levels the outstanding counts
    so the base layer, the smallest-capacity slots every cache has, ends up
    holding many different files instead of a few tail files over and over.
    The base layer is then filled file by file, each file going to the
    caches with the most free slots (ties to the lower cache index). On a
    homogeneous profile only the second step runs.

    If a copy finds no cache, copies already placed are shifted along an
    augmenting path; PlacementError means no duplicate-free placement exists.
    """
    n, m = len(plan.copies), profile.m
    if plan.total > profile.M:
        raise PlacementError(f"{plan.total} copies exceed {profile.M} slots")
    for i, d in enumerate(plan.copies, start=1):
        if d > m:
            raise PlacementError(f"file {i} needs {d} copies but there are {m} caches")
    caps = profile.capacities
    base = min(caps)
    holds: list[set[int]] = [set() for _ in range(m)]
    free = list(caps)
    left = np.array(plan.copies, dtype=np.int64)
    files = np.arange(n)
    for s in range(m):
        extra = caps[s] - base
        if extra == 0:
            continue
        for i in np.lexsort((files, -left))[:extra].tolist():
            if left[i] == 0:
                break
            holds[s].add(i + 1)
            left[i] -= 1
            free[s] -= 1
    for i in range(n):
        f = i + 1
        need = int(left[i])
        if need == 0:
            continue
        order = sorted((s for s in range(m) if free[s] > 0 and f not in holds[s]),
                       key=lambda s: (-free[s], s))
        for s in order[:need]:
            holds[s].add(f)
            free[s] -= 1
        for _ in range(need - len(order[:need])):
            if not _shift_in(f, holds, free):
                raise PlacementError(f"no duplicate-free placement gives file {f} {plan.copies[i]} copies")
    return PlacementMap.from_sets(caps, n, {s + 1: h for s, h in enumerate(holds)})


def ppmm_deliver(batch: RequestBatch, placement: PlacementMap) -> DeliveryReport:
    g = build_request_graph(batch, placement)
    return DeliveryReport.from_matching(batch.requests.tolist(), max_matching(g))
