"""Zipf file popularity and i.i.d. request batches.

Files are indexed 1..n in decreasing order of popularity. Randomness comes
from numpy's ``Generator`` backed by PCG64 (PCG XSL RR 128/64), seeded with
an explicit 64-bit integer, so a given seed yields the same batch on every
platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def make_rng(seed: int) -> np.random.Generator:
    """The one PRNG used everywhere: PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True)
class PopularityModel:
    n: int
    beta: float
    pmf: np.ndarray = field(repr=False, compare=False)
    cdf: np.ndarray = field(repr=False, compare=False)

    @property
    def p1(self) -> float:
        return float(self.pmf[0])

    def p(self, i: int) -> float:
        """Popularity of file ``i`` (1-based)."""
        return float(self.pmf[i - 1])


def build_popularity(n: int, beta: float) -> PopularityModel:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"file count must be a positive integer, got {n!r}")
    beta = float(beta)
    if not math.isfinite(beta) or beta < 0:
        raise ValueError(f"Zipf parameter must be finite and >= 0, got {beta!r}")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    weights = ranks ** -beta
    # fsum is exactly rounded; n up to 1e6 with beta < 1 loses digits otherwise
    p1 = 1.0 / math.fsum(weights.tolist())
    pmf = p1 * weights
    pmf.setflags(write=False)
    cdf = np.cumsum(pmf)
    cdf[-1] = 1.0
    cdf.setflags(write=False)
    return PopularityModel(int(n), beta, pmf, cdf)


@dataclass(frozen=True)
class RequestBatch:
    requests: np.ndarray  # 1-based file index per request, in arrival order
    counts: np.ndarray  # counts[i - 1] = b_i
    seed: int | None = None

    @property
    def size(self) -> int:
        return len(self.requests)

    def count(self, i: int) -> int:
        return int(self.counts[i - 1])

    @classmethod
    def from_requests(cls, requests, n: int, seed: int | None = None) -> "RequestBatch":
        req = np.asarray(requests, dtype=np.int64).reshape(-1)
        if req.size and (req.min() < 1 or req.max() > n):
            raise ValueError(f"request indices must lie in [1, {n}]")
        counts = np.bincount(req - 1, minlength=n) if req.size else np.zeros(n, dtype=np.int64)
        req.setflags(write=False)
        counts.setflags(write=False)
        return cls(req, counts, seed)


def batch_size(m: int, rho: float) -> int:
    """Requests per time-slot, floor(rho * m).

    The 1e-9 guard keeps products such as 0.29 * 100 = 28.999999999999996
    from flooring one short.
    """
    return math.floor(rho * m + 1e-9)


def sample_batch(model: PopularityModel, size: int, seed: int) -> RequestBatch:
    """Draw ``size`` i.i.d. requests by inverse-CDF lookup."""
    if size < 0:
        raise ValueError("batch size must be non-negative")
    u = make_rng(seed).random(size)
    idx = np.searchsorted(model.cdf, u, side="right")
    np.minimum(idx, model.n - 1, out=idx)
    return RequestBatch.from_requests(idx + 1, model.n, seed)
