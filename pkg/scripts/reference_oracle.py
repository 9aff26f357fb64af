"""Independent reference simulation used to pin acceptance thresholds.

Written without importing ``hetcache``: it uses numpy's ``Generator.choice``
for requests, scipy's Hopcroft-Karp for matching and a direct placement
loop. Running it prints the numbers that ``tests/test_acceptance.py`` pins.

    python scripts/reference_oracle.py
"""
import math
import sys

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching


def zipf(n, beta):
    w = np.arange(1, n + 1, dtype=float) ** -beta
    return w / w.sum()


def proportional_copies(p, M, m):
    d = np.clip(np.floor(M * p + 0.5), 0, m).astype(int)
    i = 0
    while d.sum() < min(M, len(p) * m):
        if d[i % len(p)] < m:
            d[i % len(p)] += 1
        i += 1
    i = len(p) - 1
    while d.sum() > M:
        if d[i % len(p)] > 0:
            d[i % len(p)] -= 1
        i = i - 1 if i > 0 else len(p) - 1
    return d


def place(d, caps):
    # above the smallest capacity: each cache grabs the files with most copies left;
    # then the base layer: each file goes to the caches with most room
    left = list(d)
    base = min(caps)
    holds = [set() for _ in caps]
    free = list(caps)
    for c, cap in enumerate(caps):
        ranked = sorted(range(len(left)), key=lambda f: (-left[f], f))
        for f in ranked[:cap - base]:
            if left[f] > 0:
                holds[c].add(f)
                left[f] -= 1
                free[c] -= 1
    for f, copies in enumerate(left):
        order = sorted((c for c in range(len(caps)) if free[c] > 0 and f not in holds[c]),
                       key=lambda c: (-free[c], c))
        assert len(order) >= copies
        for c in order[:copies]:
            holds[c].add(f)
            free[c] -= 1
    return holds


def rate(holds, p, mt, rng):
    n, m = len(p), len(holds)
    req = rng.choice(n, size=mt, p=p)
    rows, cols = [], []
    for r, f in enumerate(req):
        for c in range(m):
            if f in holds[c]:
                rows.append(r)
                cols.append(c)
    g = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(mt, m))
    match = maximum_bipartite_matching(g, perm_type="column")
    return len({int(req[r]) for r in range(mt) if match[r] < 0})


def experiment(n, m, beta, caps, trials, seed):
    p = zipf(n, beta)
    M = sum(caps)
    holds = place(proportional_copies(p, M, m), caps)
    rng = np.random.default_rng(seed)
    mt = math.floor(0.97 * m + 1e-9)
    rates = np.array([rate(holds, p, mt, rng) for _ in range(trials)])
    return rates.mean(), rates.std(ddof=1) / math.sqrt(trials), float(np.mean(rates == 0))


def ks_mlp_rates(n, m, beta, caps, trials, seed, delta=0.5):
    p = zipf(n, beta)
    mt = math.floor(0.97 * m + 1e-9)
    lm = math.log(m)
    n2 = min(max(math.floor(m ** ((1 + delta) / beta)), 1), n)
    n1 = min(max(math.floor((mt * p[0]) ** (1 / beta) / lm ** (2 / beta)), 1), n2)
    w = np.empty(n)
    for i in range(n):
        if i == 0:
            w[i] = m
        elif i < n1:
            w[i] = math.ceil((1 + p[0] / 2) * mt * p[i] - 1e-9)
        elif i < n2:
            w[i] = math.ceil(4 * p[0] * lm * lm - 1e-9)
        else:
            w[i] = math.ceil(1 / delta + 1 - 1e-9)
    v = 1 - (1 - p) ** mt
    # stable sort keeps the lower index first on equal density
    room, keep = sum(caps), []
    for i in np.argsort(-(v / w), kind="stable"):
        if w[i] > room:
            break
        keep.append(int(i))
        room -= w[i]
    holds = [set() for _ in caps]
    free = list(caps)
    c = 0
    for f in sorted(keep):
        for _ in range(int(w[f])):
            for step in range(len(caps)):
                t = (c + step) % len(caps)
                if free[t] and f not in holds[t]:
                    holds[t].add(f)
                    free[t] -= 1
                    c = t + 1
                    break
    where = [[t for t in range(len(caps)) if f in holds[t]] for f in range(n)]
    rng = np.random.default_rng(seed)
    rates = []
    for _ in range(trials):
        req = rng.choice(n, size=mt, p=p)
        busy = set()
        missed = 0
        for f in sorted(set(req.tolist()), reverse=True):
            need = int(np.sum(req == f))
            idle = [t for t in where[f] if t not in busy]
            if need > len(idle):
                missed += 1
                continue
            busy.update(rng.choice(idle, size=need, replace=False).tolist())
        rates.append(missed)
    rates = np.array(rates)
    return rates.mean(), rates.std(ddof=1) / math.sqrt(trials)


def rich_poor(m, m1, M):
    k = (M - (m - m1)) // m1
    return [k] * m1 + [1] * (m - m1)


def main():
    seed = int(sys.argv[1]) if len(sys.argv) > 1 else 12345
    n = m = 400
    means = {}
    for div in (1, 10, 20, 40):
        mean, se, _ = experiment(n, m, 0.3, rich_poor(m, m // div, 3 * n), 100, seed + div)
        means[div] = mean
        print(f"fig4 n=m=400 m1=m/{div:<2d} mean={mean:.3f} se={se:.3f}")
    print(f"fig4 ratio m1=m/20 vs m1=m = {means[20] / means[1]:.3f}")
    vals = list(means.values())
    print(f"beta=0.3 relative spread over m1 in {{m, m/10, m/20, m/40}} = "
          f"{(max(vals) - min(vals)) / min(vals):.3f}")

    n = m = 200
    M = math.ceil(3 * n * math.log(m))
    q, r = divmod(M, m)
    caps = [q + 1] * r + [q] * (m - r)
    mean, se, zero = experiment(n, m, 0.3, caps, 100, seed + 2)
    print(f"corollary1 n=m=200 M={M} mean={mean:.3f} se={se:.3f} zero-rate share={zero:.2f}")

    mean, se = ks_mlp_rates(100, 100, 1.2, [2] * 50 + [1] * 50, 100, seed + 3)
    print(f"ks+mlp m=n=100 M=150 homogeneous-ish mean={mean:.3f} se={se:.3f}")
    m = 400
    spread = {}
    for div in (1, 10, 20, 40):
        m1 = m // div
        mean, se = ks_mlp_rates(5 * m, m, 1.2, rich_poor(m, m1, 15 * m), 100, seed + 4 + div)
        spread[div] = mean
        print(f"fig6 m=400 m1=m/{div:<2d} mean={mean:.3f} se={se:.3f}")
    vals = list(spread.values())
    print(f"beta=1.2 relative spread = {(max(vals) - min(vals)) / min(vals):.3f}")


if __name__ == "__main__":
    main()
