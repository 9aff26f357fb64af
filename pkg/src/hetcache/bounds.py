"""Lower bound on the optimal expected rate and scaling exponents.

Exponents are metadata for log-log overlays: the constants in front of
them are unknown, so no numeric rate prediction is derived from them.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from hetcache.ksmlp import KnapsackInstance, request_probabilities, solve_fractional_knapsack
from hetcache.popularity import PopularityModel
from hetcache.system import StorageProfile, SystemConfig

_EQ_TOL = 1e-9


def prop1_lower_bound(model: PopularityModel, config: SystemConfig) -> float:
    """Lower bound on E[optimal rate] when no stored bit serves two users.

    sum_i v_i minus the fractional-knapsack optimum with values v_i,
    weights max(batch_size * p_i, 1) and capacity M, clamped at zero.
    """
    mt = config.batch_size
    v = request_probabilities(model, mt)
    w = np.maximum(mt * model.pmf, 1.0)
    inst = KnapsackInstance(tuple(v.tolist()), tuple(w.tolist()), float(config.M))
    best = solve_fractional_knapsack(inst).objective
    return max(0.0, math.fsum(v.tolist()) - best)


@dataclass(frozen=True)
class RegimeExponent:
    theorem: str
    regime: str
    exponent: float
    direction: str  # "upper" (O) or "lower" (Omega)

    def to_dict(self) -> dict:
        d = asdict(self)
        if math.isinf(self.exponent):
            d["exponent"] = "-inf" if self.exponent < 0 else "inf"
        return d


def _cmp(a: float, b: float) -> int:
    if abs(a - b) <= _EQ_TOL:
        return 0
    return -1 if a < b else 1


def _beta_gt1_table(theorem, beta, mu, gamma, direction):
    crit = 1 / (beta - 1)
    poly = 1 - mu * (beta - 1)
    if _cmp(gamma, crit) <= 0:
        c = _cmp(mu, gamma)
        if c < 0:
            return RegimeExponent(theorem, "M <= (1-eps) n", poly, direction)
        if c == 0:
            # the alternative form (1 - mu(beta-1)) / beta agrees only at mu = 1
            return RegimeExponent(theorem, "M = n", (2 - mu * beta) / beta, direction)
        return RegimeExponent(theorem, "M >= (1+eps) n", 0.0, direction)
    if _cmp(mu, crit) < 0:
        return RegimeExponent(theorem, "M = o(m^(1/(beta-1)))", poly, direction)
    return RegimeExponent(theorem, "M = Omega(m^(1/(beta-1)))", 0.0, direction)


def regime_exponent(theorem: str, beta: float, mu: float, gamma: float) -> RegimeExponent | None:
    """Exponent e of the m^e rate bound in the regime fixed by (beta, mu, gamma).

    M = m^mu and n = m^gamma, so mu < gamma is the M <= (1-eps) n case,
    mu == gamma is M = n and mu > gamma is M >= (1+eps) n. Returns None
    when the theorem says nothing for these parameters.
    """
    theorem = str(theorem)
    if theorem == "1":
        if not 0 <= beta < 1:
            return None
        c = _cmp(mu, gamma)
        if c < 0:
            return RegimeExponent("1", "M < (1-eps) n", 1.0, "upper")
        if c == 0:
            return RegimeExponent("1", "M = n", 2.0, "upper")
        return RegimeExponent("1", "M >= n, M/n -> inf", -math.inf, "upper")
    if beta <= 1:
        return None
    if theorem == "3":
        return _beta_gt1_table("3", beta, mu, gamma, "lower")
    if theorem == "4":
        return _beta_gt1_table("4", beta, mu, gamma, "upper")
    if theorem == "5":
        return RegimeExponent("5", "m - m^(1-mu(beta-1)-delta) caches hold <= (1-eps) n",
                              1 - mu * (beta - 1), "lower")
    return None


def corollary1_memory(n: int, m: int) -> int:
    """Homogeneous memory making the PPMM rate vanish for beta < 1: ceil(3 n ln m)."""
    if n < 2 or m < 2:
        raise ValueError("need n, m >= 2")
    return math.ceil(3 * n * math.log(m))


def corollary1_met(config: SystemConfig) -> bool:
    return config.beta < 1 and config.m >= 2 and config.M >= 3 * config.n * math.log(config.m)


def poor_cache_condition(profile: StorageProfile, n: int, beta: float, alpha: float,
                         scale: float = 1.0) -> bool:
    """At least alpha*m caches hold no more than scale * n / m^(1/(1-beta)) files.

    The beta < 1 heterogeneity condition under which every policy has a
    rate that grows without bound. Only a yes/no check: the constants are
    unspecified.
    """
    if not 0 <= beta < 1:
        return False
    m = profile.m
    cap = scale * n / m ** (1 / (1 - beta))
    return sum(k <= cap for k in profile.capacities) >= alpha * m


def rich_cache_condition(profile: StorageProfile, n: int, rho: float, c: float,
                         delta: float, scale: float = 1.0) -> bool:
    """At least (rho + c) m caches hold scale * n / m^delta files or more (PPMM o(1) rate)."""
    m = profile.m
    need = scale * n / m ** delta
    return sum(k >= need for k in profile.capacities) >= (rho + c) * m


def top_equal_count(profile: StorageProfile) -> int:
    """How many of the largest caches share the top capacity."""
    top = profile.capacities[0]
    return sum(k == top for k in profile.capacities)


def top_homogeneity_condition(profile: StorageProfile, beta: float, delta: float,
                              scale: float = 1.0) -> bool:
    """The top scale * m^(2-beta+delta) caches are equal, the KS+MLP guarantee's precondition.

    With scale 1 this cannot hold for beta < 1 + delta, since it asks for
    more than m caches.
    """
    return top_equal_count(profile) >= scale * profile.m ** (2 - beta + delta)


def bounds_report(model: PopularityModel, config: SystemConfig,
                  profile: StorageProfile | None = None, delta: float = 0.5) -> dict:
    mu, gamma = config.mu, config.gamma
    exps = []
    if not (math.isnan(mu) or math.isnan(gamma)):
        for th in ("1", "3", "4", "5"):
            e = regime_exponent(th, config.beta, mu, gamma)
            if e is not None:
                exps.append(e.to_dict())
    out = {
        "config": config.to_dict(),
        "batch_size": config.batch_size,
        "gamma": None if math.isnan(gamma) else gamma,
        "mu": None if math.isnan(mu) else mu,
        "prop1_lower_bound": prop1_lower_bound(model, config),
        "exponents": exps,
    }
    if config.n >= 2 and config.m >= 2:
        out["corollary1_memory"] = corollary1_memory(config.n, config.m)
        out["corollary1_met"] = corollary1_met(config)
    if profile is not None and config.beta > 1:
        out["top_homogeneity_met"] = top_homogeneity_condition(profile, config.beta, delta)
    return out
