"""Request-to-cache bipartite graphs and maximum-cardinality matching."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from hetcache.popularity import RequestBatch
from hetcache.system import PlacementMap

BRUTE_FORCE_LIMIT = 12


@dataclass(frozen=True)
class BipartiteGraph:
    """Left vertices are request positions 0..len(adj)-1, right vertices caches 1..n_right.

    Only left adjacency is stored; ``adj[r]`` lists eligible caches in
    ascending order.
    """

    adj: tuple[tuple[int, ...], ...]
    n_right: int

    @property
    def n_left(self) -> int:
        return len(self.adj)

    def edges(self):
        for r, caches in enumerate(self.adj):
            for s in caches:
                yield r, s

    def right_degree(self, cache: int) -> int:
        return sum(cache in a for a in self.adj)

    @classmethod
    def from_edges(cls, n_left: int, n_right: int, edges) -> "BipartiteGraph":
        adj = [set() for _ in range(n_left)]
        for r, s in edges:
            if not (0 <= r < n_left and 1 <= s <= n_right):
                raise ValueError(f"edge {(r, s)} out of range")
            adj[r].add(s)
        return cls(tuple(tuple(sorted(a)) for a in adj), n_right)


def build_request_graph(batch: RequestBatch, placement: PlacementMap) -> BipartiteGraph:
    adj = tuple(tuple(placement.caches_of(int(f))) for f in batch.requests)
    return BipartiteGraph(adj, placement.m)


def max_matching(g: BipartiteGraph) -> dict[int, int]:
    """Hopcroft-Karp. Returns request position -> cache (1-based).

    A greedy pass in adjacency order seeds the matching; phases of
    shortest augmenting paths then run until none is left. The result is
    deterministic for a given graph.
    """
    nl = g.n_left
    adj = [[s - 1 for s in a] for a in g.adj]
    match_l = [-1] * nl
    match_r = [-1] * g.n_right

    for u in range(nl):
        for v in adj[u]:
            if match_r[v] < 0:
                match_l[u] = v
                match_r[v] = u
                break

    while True:
        dist = [-1] * nl
        queue = [u for u in range(nl) if match_l[u] < 0]
        if not queue:
            break
        for u in queue:
            dist[u] = 0
        limit = -1
        head = 0
        while head < len(queue):
            u = queue[head]
            head += 1
            if limit >= 0 and dist[u] >= limit:
                continue
            for v in adj[u]:
                w = match_r[v]
                if w < 0:
                    if limit < 0:
                        limit = dist[u]
                elif dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        if limit < 0:
            break

        it = [0] * nl
        for s in range(nl):
            if match_l[s] >= 0 or dist[s] != 0:
                continue
            stack = [s]
            path = []
            while stack:
                u = stack[-1]
                nbrs = adj[u]
                moved = False
                while it[u] < len(nbrs):
                    v = nbrs[it[u]]
                    it[u] += 1
                    w = match_r[v]
                    if w < 0:
                        if dist[u] != limit:
                            continue
                        path.append(v)
                        for uu, vv in zip(stack, path):
                            match_l[uu] = vv
                            match_r[vv] = uu
                        stack = []
                        moved = True
                        break
                    if dist[w] == dist[u] + 1:
                        path.append(v)
                        stack.append(w)
                        moved = True
                        break
                if not stack:
                    break
                if not moved:
                    dist[u] = -1
                    stack.pop()
                    if path:
                        path.pop()

    return {u: v + 1 for u, v in enumerate(match_l) if v >= 0}


def greedy_matching(g: BipartiteGraph) -> dict[int, int]:
    """Left-to-right first-fit; a baseline that max_matching never loses to."""
    used = set()
    out = {}
    for r, caches in enumerate(g.adj):
        for s in caches:
            if s not in used:
                used.add(s)
                out[r] = s
                break
    return out


def brute_force_max_matching(g: BipartiteGraph) -> int:
    """Exact maximum matching size by exhaustive search (test oracle).

    Every request is either left out or given one unused eligible cache;
    memoising on (request, used caches) keeps 12x12 instances cheap.
    """
    if g.n_left > BRUTE_FORCE_LIMIT or g.n_right > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices per side")
    adj = g.adj

    @lru_cache(maxsize=None)
    def best(r: int, used: int) -> int:
        if r == len(adj):
            return 0
        top = best(r + 1, used)
        for s in adj[r]:
            bit = 1 << (s - 1)
            if not used & bit:
                top = max(top, 1 + best(r + 1, used | bit))
        return top

    return best(0, 0)


def check_matching(g: BipartiteGraph, matching: dict[int, int]) -> None:
    caches = list(matching.values())
    assert len(set(caches)) == len(caches), "a cache serves two requests"
    for r, s in matching.items():
        assert 0 <= r < g.n_left
        assert s in g.adj[r], f"request {r} matched to cache {s} without an edge"

