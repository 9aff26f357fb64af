"""Cluster configuration, storage profiles, placements and delivery reports.

Caches and files are 1-based everywhere in this API.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from hetcache.popularity import batch_size


class PlacementError(RuntimeError):
    pass


def _require_int(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not float(value).is_integer():
        raise ValueError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class SystemConfig:
    """m caches, n unit-size files, M cumulative slots, load factor rho.

    M may be below m here so that lower bounds can be evaluated for tiny
    memories; any StorageProfile paired with a config forces M >= m.
    """

    m: int
    n: int
    M: int
    rho: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "m", _require_int("m", self.m, 1))
        object.__setattr__(self, "n", _require_int("n", self.n, 1))
        object.__setattr__(self, "M", _require_int("M", self.M, 0))
        rho, beta = float(self.rho), float(self.beta)
        if not 0 < rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {rho}")
        if not math.isfinite(beta) or beta < 0:
            raise ValueError(f"beta must be finite and >= 0, got {beta}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "beta", beta)

    @property
    def batch_size(self) -> int:
        return batch_size(self.m, self.rho)

    @property
    def gamma(self) -> float:
        return math.log(self.n) / math.log(self.m) if self.m > 1 else math.nan

    @property
    def mu(self) -> float:
        if self.m < 2 or self.M < 1:
            return math.nan
        return math.log(self.M) / math.log(self.m)

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "M": self.M, "rho": self.rho, "beta": self.beta}

    @classmethod
    def from_dict(cls, d: dict) -> "SystemConfig":
        return cls(m=d["m"], n=d["n"], M=d["M"], rho=d["rho"], beta=d["beta"])


@dataclass(frozen=True)
class StorageProfile:
    capacities: tuple[int, ...]

    def __post_init__(self):
        caps = tuple(_require_int("capacity", k, 1) for k in self.capacities)
        if not caps:
            raise ValueError("a profile needs at least one cache")
        if any(a < b for a, b in zip(caps, caps[1:])):
            raise ValueError("capacities must be non-increasing")
        object.__setattr__(self, "capacities", caps)

    @property
    def m(self) -> int:
        return len(self.capacities)

    @property
    def M(self) -> int:
        return sum(self.capacities)

    def capacity(self, cache: int) -> int:
        return self.capacities[cache - 1]

    def check_against(self, config: SystemConfig) -> None:
        if self.m != config.m or self.M != config.M:
            raise ValueError(
                f"profile has m={self.m}, M={self.M} but config has m={config.m}, M={config.M}"
            )

    def to_dict(self) -> dict:
        return {"capacities": list(self.capacities)}

    @classmethod
    def from_dict(cls, d: dict) -> "StorageProfile":
        return cls(tuple(d["capacities"]))


def make_rich_poor_profile(m: int, m1: int, k: int) -> StorageProfile:
    """``m1`` rich caches with ``k`` slots, then ``m - m1`` poor caches with one."""
    if not 1 <= m1 <= m:
        raise ValueError(f"need 1 <= m1 <= m, got m1={m1}, m={m}")
    if k < 1:
        raise ValueError(f"rich capacity must be >= 1, got {k}")
    return StorageProfile((k,) * m1 + (1,) * (m - m1))


def make_homogeneous_profile(m: int, M: int) -> StorageProfile:
    """Spread M slots as evenly as integers allow (sizes differ by at most one)."""
    q, r = divmod(M, m)
    if q < 1:
        raise ValueError(f"M={M} cannot give each of {m} caches a slot")
    return StorageProfile((q + 1,) * r + (q,) * (m - r))


class PlacementMap:
    """Which files each cache holds, kept in both directions.

    ``add`` is the only mutator, so cache->files and file->caches stay
    inverse to each other. ``freeze`` makes the map read-only.
    """

    def __init__(self, capacities: Iterable[int], n: int):
        self.capacities = tuple(capacities)
        self.n = n
        self._files = [set() for _ in self.capacities]
        self._caches: list[list[int]] = [[] for _ in range(n)]
        self._frozen = False
        self.dropped = 0  # copies a policy could not place

    @property
    def m(self) -> int:
        return len(self.capacities)

    def add(self, file: int, cache: int) -> None:
        if self._frozen:
            raise PlacementError("placement is frozen")
        held = self._files[cache - 1]
        if file in held:
            raise PlacementError(f"cache {cache} already holds file {file}")
        if len(held) >= self.capacities[cache - 1]:
            raise PlacementError(f"cache {cache} is full")
        held.add(file)
        self._caches[file - 1].append(cache)

    def freeze(self) -> "PlacementMap":
        for lst in self._caches:
            lst.sort()
        self._caches = [tuple(c) for c in self._caches]
        self._files = [frozenset(f) for f in self._files]
        self._frozen = True
        return self

    def files_on(self, cache: int):
        return self._files[cache - 1]

    def caches_of(self, file: int):
        """Replica list D_i, ascending cache index once frozen."""
        return self._caches[file - 1]

    def free(self, cache: int) -> int:
        return self.capacities[cache - 1] - len(self._files[cache - 1])

    def used(self) -> int:
        return sum(len(f) for f in self._files)

    def as_dict(self) -> dict[int, set[int]]:
        return {s + 1: set(f) for s, f in enumerate(self._files)}

    def check(self) -> None:
        for s, held in enumerate(self._files, start=1):
            assert len(held) <= self.capacities[s - 1], f"cache {s} over capacity"
            for f in held:
                assert s in self._caches[f - 1]
        for f, caches in enumerate(self._caches, start=1):
            assert len(set(caches)) == len(caches), f"file {f} listed twice on a cache"
            for s in caches:
                assert f in self._files[s - 1]

    @classmethod
    def from_sets(cls, capacities, n: int, sets: dict[int, Iterable[int]]) -> "PlacementMap":
        pm = cls(capacities, n)
        for cache in sorted(sets):
            for f in sorted(sets[cache]):
                pm.add(f, cache)
        return pm.freeze()


def transmission_rate(unserved: Iterable[int]) -> int:
    """Distinct files the central server must send: one copy per file."""
    return len(set(unserved))


@dataclass(frozen=True)
class DeliveryReport:
    matching: dict[int, int]  # request position in batch (0-based) -> cache
    unserved_requests: tuple[int, ...]
    rate: int

    @property
    def matched_count(self) -> int:
        return len(self.matching)

    @classmethod
    def from_matching(cls, requests, matching: dict[int, int]) -> "DeliveryReport":
        unserved = tuple(int(f) for r, f in enumerate(requests) if r not in matching)
        return cls(dict(matching), unserved, transmission_rate(unserved))
