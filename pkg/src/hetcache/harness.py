"""Seeded Monte-Carlo trials, parameter sweeps and the figure presets.

Seeds: every trial gets ``mix64(master, point_index, trial_index)``; the
request batch is drawn with ``mix64(trial_seed, 0)`` and MLP's random cache
choice uses ``mix64(trial_seed, 1)``. ``mix64`` folds each 64-bit word into
a running state with the SplitMix64 finalizer, so results never depend on
execution order or worker count.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable

import numpy as np

from hetcache.ksmlp import DEFAULT_DELTA, UnsupportedRegime, ksmlp_placement, mlp_deliver
from hetcache.popularity import PopularityModel, build_popularity, sample_batch
from hetcache.ppmm import ppmm_deliver, ppmm_place, ppmm_replication
from hetcache.system import (
    DeliveryReport,
    PlacementMap,
    StorageProfile,
    SystemConfig,
    make_rich_poor_profile,
)

MASK64 = (1 << 64) - 1
POLICIES = ("ppmm", "ksmlp")
AXES = ("n", "k", "m1")

CSV_HEADER = ["preset", "policy", "m", "n", "beta", "rho", "M", "m1", "k", "delta",
              "trial", "seed", "matched", "unserved", "rate"]
SUMMARY_HEADER = CSV_HEADER + ["stderr"]


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix64(*words: int) -> int:
    h = 0
    for w in words:
        h = splitmix64(h ^ (int(w) & MASK64))
    return h


class SweepError(RuntimeError):
    pass


@dataclass
class Prepared:
    """A placement built once and shared by all trials of a point."""

    config: SystemConfig
    profile: StorageProfile
    model: PopularityModel
    policy: str
    delta: float
    placement: PlacementMap


def prepare(config: SystemConfig, profile: StorageProfile, policy: str,
            delta: float = DEFAULT_DELTA) -> Prepared:
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}")
    profile.check_against(config)
    model = build_popularity(config.n, config.beta)
    if policy == "ppmm":
        placement = ppmm_place(ppmm_replication(model, config), profile)
    else:
        placement = ksmlp_placement(config, profile, model, delta)
    return Prepared(config, profile, model, policy, delta, placement)


def run_trial(config: SystemConfig, profile: StorageProfile, policy: str,
              delta: float, trial_seed: int, prepared: Prepared | None = None) -> DeliveryReport:
    prepared = prepared or prepare(config, profile, policy, delta)
    batch = sample_batch(prepared.model, config.batch_size, mix64(trial_seed, 0))
    if policy == "ppmm":
        return ppmm_deliver(batch, prepared.placement)
    return mlp_deliver(batch, prepared.placement, prepared.model, mix64(trial_seed, 1))


def solve_rich_capacity(m: int, m1: int, M_target: float) -> int:
    """Largest k with m1*k + (m - m1) <= M_target (at least 1)."""
    return max(1, math.floor((M_target - (m - m1)) / m1 + 1e-9))


@dataclass(frozen=True)
class Point:
    index: int
    curve: int
    x: int
    config: SystemConfig
    m1: int
    k: int
    capacities: tuple[int, ...] | None = None  # overrides the rich/poor profile

    @property
    def profile(self) -> StorageProfile:
        if self.capacities is not None:
            return StorageProfile(self.capacities)
        return make_rich_poor_profile(self.config.m, self.m1, self.k)


@dataclass(frozen=True)
class ExperimentSpec:
    """One rich/poor sweep. Each entry of ``m1_divisors`` is a curve with m1 = ceil(m / d).

    axis "n": x is the file count, m = n // files_per_cache, M ~ memory_per_file * n.
    axis "k": x is the rich capacity, m and n fixed.
    axis "m1": x is the rich-cache count, m and n fixed, M ~ memory_per_file * n.
    In every case k is solved (rounded down) and M recomputed exactly from (m1, k).
    """

    name: str
    policy: str
    beta: float
    axis: str
    values: tuple[int, ...]
    m1_divisors: tuple[int, ...] = (1,)
    rho: float = 0.97
    files_per_cache: int = 1
    memory_per_file: float = 3.0
    m: int | None = None
    n: int | None = None
    delta: float = DEFAULT_DELTA
    trials: int = 100
    seed: int = 1

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.axis not in AXES:
            raise ValueError(f"sweep axis must be one of {AXES}")
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if not self.values or any(v <= 0 for v in self.values):
            raise ValueError("sweep values must be positive")
        if self.axis in ("k", "m1") and (self.m is None or self.n is None):
            raise ValueError(f"axis {self.axis!r} needs fixed m and n")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        object.__setattr__(self, "m1_divisors", tuple(int(d) for d in self.m1_divisors))

    def points(self) -> list[Point]:
        out = []
        curves = self.m1_divisors if self.axis != "m1" else (0,)
        for c, div in enumerate(curves):
            for x in self.values:
                if self.axis == "n":
                    n, m = x, max(1, x // self.files_per_cache)
                else:
                    n, m = self.n, self.m
                if self.axis == "m1":
                    m1 = x
                else:
                    m1 = math.ceil(m / div)
                if self.axis == "k":
                    k = x
                else:
                    k = solve_rich_capacity(m, m1, self.memory_per_file * n)
                M = m1 * k + (m - m1)
                cfg = SystemConfig(m=m, n=n, M=M, rho=self.rho, beta=self.beta)
                out.append(Point(len(out), c, x, cfg, m1, k))
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        d["values"] = list(self.values)
        d["m1_divisors"] = list(self.m1_divisors)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        d["values"] = tuple(d["values"])
        d["m1_divisors"] = tuple(d.get("m1_divisors", (1,)))
        return cls(**d)


@dataclass(frozen=True)
class PointResult:
    point: Point
    seeds: tuple[int, ...]
    matched: tuple[int, ...]
    unserved: tuple[int, ...]
    rates: tuple[int, ...]
    dropped_copies: int = 0

    @property
    def mean(self) -> float:
        return math.fsum(self.rates) / len(self.rates)

    @property
    def stderr(self) -> float:
        if len(self.rates) < 2:
            return 0.0
        return float(np.std(self.rates, ddof=1)) / math.sqrt(len(self.rates))


@dataclass
class SweepResult:
    spec: ExperimentSpec
    records: list[PointResult] = field(default_factory=list)

    def curve(self, c: int) -> list[PointResult]:
        return [r for r in self.records if r.point.curve == c]

    def at(self, curve: int, x: int) -> PointResult:
        for r in self.records:
            if r.point.curve == curve and r.point.x == x:
                return r
        raise KeyError((curve, x))


def run_point(spec: ExperimentSpec, point: Point, trial_order: Iterable[int] | None = None) -> PointResult:
    prep = prepare(point.config, point.profile, spec.policy, spec.delta)
    order = list(range(spec.trials)) if trial_order is None else list(trial_order)
    rows = {}
    for t in order:
        seed = mix64(spec.seed, point.index, t)
        rep = run_trial(point.config, point.profile, spec.policy, spec.delta, seed, prep)
        rows[t] = (seed, rep.matched_count, len(rep.unserved_requests), rep.rate)
    ts = sorted(rows)
    return PointResult(point, *(tuple(rows[t][j] for t in ts) for j in range(4)),
                       dropped_copies=prep.placement.dropped)


def _run_point_job(args):
    spec, point = args
    try:
        return run_point(spec, point)
    except Exception as exc:  # re-raised in the parent with the point named
        return exc


def run_sweep(spec: ExperimentSpec, jobs: int = 1) -> SweepResult:
    points = spec.points()
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_point_job, [(spec, p) for p in points]))
    else:
        outcomes = [_run_point_job((spec, p)) for p in points]
    result = SweepResult(spec)
    for p, out in zip(points, outcomes):
        if isinstance(out, Exception):
            raise SweepError(
                f"{spec.name}: point {p.index} (m={p.config.m}, n={p.config.n}, "
                f"m1={p.m1}, k={p.k}) failed: {out}"
            ) from out
        result.records.append(out)
    return result


def default_jobs() -> int:
    return os.cpu_count() or 1


def simulate_point(config: SystemConfig, profile: StorageProfile, policy: str,
                   delta: float = DEFAULT_DELTA, trials: int = 100, seed: int = 1,
                   name: str = "simulate") -> SweepResult:
    """T trials at one explicit (config, profile) point, packaged like a one-point sweep.

    The m1 and k columns report how many caches share the top capacity and
    what that capacity is.
    """
    profile.check_against(config)
    if policy == "ksmlp" and config.beta <= 1:
        raise UnsupportedRegime(f"KS+MLP needs beta > 1, got beta={config.beta}")
    spec = ExperimentSpec(name, policy, config.beta, "n", (config.n,), rho=config.rho,
                          delta=delta, trials=trials, seed=seed)
    top = profile.capacities[0]
    m1 = sum(k == top for k in profile.capacities)
    point = Point(0, 0, config.n, config, m1, top, profile.capacities)
    return SweepResult(spec, [run_point(spec, point)])


def preset_fig4(trials: int = 100, seed: int = 1) -> ExperimentSpec:
    return ExperimentSpec("fig4", "ppmm", beta=0.3, axis="n", values=(50, 100, 200, 400),
                          m1_divisors=(1, 2, 10, 20), files_per_cache=1, memory_per_file=3.0,
                          trials=trials, seed=seed)


FIG5_K_VALUES = (1, 2, 3, 4, 6, 8, 12, 16, 20, 24, 28, 32)


def preset_fig5(trials: int = 100, seed: int = 1) -> ExperimentSpec:
    return ExperimentSpec("fig5", "ppmm", beta=0.3, axis="k", values=FIG5_K_VALUES,
                          m1_divisors=(1, 2, 4, 8), m=400, n=400, trials=trials, seed=seed)


def preset_fig6(trials: int = 100, seed: int = 1, delta: float = DEFAULT_DELTA) -> ExperimentSpec:
    return ExperimentSpec("fig6", "ksmlp", beta=1.2, axis="n", values=(200, 500, 1000, 2000),
                          m1_divisors=(1, 10, 20, 40), files_per_cache=5, memory_per_file=3.0,
                          delta=delta, trials=trials, seed=seed)


PRESETS = {"fig4": preset_fig4, "fig5": preset_fig5, "fig6": preset_fig6}


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _point_cols(spec: ExperimentSpec, p: Point) -> list[str]:
    c = p.config
    delta = _fmt(spec.delta) if spec.policy == "ksmlp" else ""
    return [spec.name, spec.policy, str(c.m), str(c.n), _fmt(c.beta), _fmt(c.rho),
            str(c.M), str(p.m1), str(p.k), delta]


def csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in result.records:
        cols = _point_cols(result.spec, r.point)
        for t, (s, a, u, rate) in enumerate(zip(r.seeds, r.matched, r.unserved, r.rates)):
            w.writerow(cols + [str(t), str(s), str(a), str(u), str(rate)])
    return buf.getvalue()


def summary_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in result.records:
        T = len(r.rates)
        w.writerow(_point_cols(result.spec, r.point) + [
            "-1", str(result.spec.seed), _fmt(sum(r.matched) / T),
            _fmt(sum(r.unserved) / T), _fmt(r.mean), _fmt(r.stderr)])
    return buf.getvalue()


def write_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(csv_text(result))


def write_summary_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(summary_csv_text(result))


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **{k: v for k, v in kw.items() if v is not None})


def check_regime(spec: ExperimentSpec) -> None:
    if spec.policy == "ksmlp" and spec.beta <= 1:
        raise UnsupportedRegime(f"KS+MLP needs beta > 1, got beta={spec.beta}")
