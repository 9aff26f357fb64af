import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetcache.harness import (
    CSV_HEADER,
    SUMMARY_HEADER,
    ExperimentSpec,
    SweepError,
    check_regime,
    csv_text,
    mix64,
    prepare,
    preset_fig4,
    preset_fig5,
    preset_fig6,
    run_point,
    run_sweep,
    run_trial,
    simulate_point,
    solve_rich_capacity,
    splitmix64,
    summary_csv_text,
    with_overrides,
)
from hetcache.ksmlp import UnsupportedRegime
from hetcache.matching import brute_force_max_matching, build_request_graph
from hetcache.popularity import sample_batch
from hetcache.system import StorageProfile, SystemConfig, make_homogeneous_profile


def test_splitmix64_reference_outputs():
    # first output of the reference generator seeded with 0 is splitmix64(0)
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert mix64(1, 2, 3) == splitmix64(splitmix64(splitmix64(1) ^ 2) ^ 3)


@given(st.integers(0, 2**64 - 1), st.integers(0, 1000), st.integers(0, 1000))
def test_mix64_stays_in_64_bits(a, b, c):
    assert 0 <= mix64(a, b, c) < 2**64


def test_same_seed_same_report():
    c = SystemConfig(m=10, n=20, M=30, rho=0.9, beta=0.3)
    p = make_homogeneous_profile(10, 30)
    assert run_trial(c, p, "ppmm", 0.5, 99) == run_trial(c, p, "ppmm", 0.5, 99)


def test_everything_everywhere_rate_zero():
    c = SystemConfig(m=4, n=4, M=16, rho=0.8, beta=0.6)
    assert c.batch_size == 3
    for seed in range(20):
        assert run_trial(c, make_homogeneous_profile(4, 16), "ppmm", 0.5, seed).rate == 0


@given(st.integers(0, 2**64 - 1))
def test_trial_unserved_matches_oracle(seed):
    c = SystemConfig(m=6, n=4, M=9, rho=0.97, beta=0.7)
    prep = prepare(c, make_homogeneous_profile(6, 9), "ppmm")
    rep = run_trial(c, prep.profile, "ppmm", 0.5, seed, prep)
    batch = sample_batch(prep.model, c.batch_size, mix64(seed, 0))
    best = brute_force_max_matching(build_request_graph(batch, prep.placement))
    assert len(rep.unserved_requests) == c.batch_size - best


def test_single_trial_has_zero_stderr():
    spec = ExperimentSpec("one", "ppmm", 0.3, "n", (20,), trials=1)
    res = run_sweep(spec)
    assert len(res.records) == 1 and res.records[0].stderr == 0.0


def test_fig4_preset_shape():
    spec = preset_fig4()
    assert (spec.beta, spec.policy, spec.trials, spec.rho) == (0.3, "ppmm", 100, 0.97)
    pts = spec.points()
    assert len(pts) == 16 and len({p.curve for p in pts}) == 4
    p = next(p for p in pts if p.x == 400 and p.m1 == 20)
    assert p.k == 41 and p.config.M == 1200 and p.config.batch_size == 388
    assert all(p.config.m == p.config.n for p in pts)


def test_fig5_preset_shape():
    spec = preset_fig5()
    pts = spec.points()
    assert {p.m1 for p in pts} == {400, 200, 100, 50}
    homo = [p for p in pts if p.m1 == 400]
    assert [p.k for p in homo] == list(spec.values)
    assert all(p.config.M == p.m1 * p.k + 400 - p.m1 for p in pts)


def test_fig6_preset_shape():
    spec = preset_fig6()
    p = next(p for p in spec.points() if p.config.m == 400 and p.m1 == 400)
    assert (p.config.n, p.config.M, p.config.batch_size) == (2000, 6000, 388)
    assert {q.m1 for q in spec.points() if q.config.m == 400} == {400, 40, 20, 10}


def test_rich_capacity_rounds_down_and_memory_is_exact():
    assert solve_rich_capacity(400, 20, 1200) == 41
    assert solve_rich_capacity(100, 8, 300) == 26
    assert solve_rich_capacity(100, 9, 300) == 23  # 209 / 9 rounds down
    spec = ExperimentSpec("x", "ppmm", 0.3, "n", (100,), m1_divisors=(12,))
    (p,) = spec.points()
    assert p.m1 == 9 and p.config.M == 9 * p.k + 91 <= 300


def test_trial_order_does_not_matter():
    spec = ExperimentSpec("x", "ppmm", 0.3, "n", (40,), trials=12)
    (p,) = spec.points()
    a = run_point(spec, p)
    b = run_point(spec, p, trial_order=reversed(range(12)))
    assert a == b


def test_parallel_and_serial_agree():
    spec = ExperimentSpec("x", "ksmlp", 1.2, "n", (50, 100), m1_divisors=(1, 5), files_per_cache=5,
                          trials=15, seed=7)
    assert csv_text(run_sweep(spec, jobs=1)) == csv_text(run_sweep(spec, jobs=3))


def test_csv_layout():
    spec = ExperimentSpec("demo", "ppmm", 0.3, "n", (20,), m1_divisors=(1, 2), trials=3, seed=5)
    res = run_sweep(spec)
    rows = list(csv.reader(io.StringIO(csv_text(res))))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 2 * 3
    assert rows[1][9] == ""  # no delta column value for ppmm
    summary = list(csv.reader(io.StringIO(summary_csv_text(res))))
    assert summary[0] == SUMMARY_HEADER
    for row, rec in zip(summary[1:], res.records):
        assert row[10] == "-1" and row[11] == "5"
        assert float(row[14]) == pytest.approx(rec.mean)
        assert float(row[15]) == pytest.approx(rec.stderr)


def test_mean_and_stderr_definitions():
    spec = ExperimentSpec("x", "ppmm", 0.3, "n", (30,), trials=25)
    (rec,) = run_sweep(spec).records
    rates = np.array(rec.rates)
    assert rec.mean == pytest.approx(rates.mean())
    assert rec.stderr == pytest.approx(rates.std(ddof=1) / math.sqrt(25))
    assert 0 <= rec.mean <= 30 and rec.stderr >= 0


def test_more_rich_caches_never_worse():
    spec = ExperimentSpec("x", "ppmm", 0.3, "n", (100,), m1_divisors=(1, 2, 10, 20), trials=60)
    recs = run_sweep(spec).records  # curves ordered from m1 = m down to m1 = m/20
    for a, b in zip(recs, recs[1:]):
        assert a.mean <= b.mean + 3 * math.hypot(a.stderr, b.stderr)


def test_failing_point_is_named():
    spec = ExperimentSpec("bad", "ksmlp", 0.3, "n", (20,))
    with pytest.raises(UnsupportedRegime):
        check_regime(spec)
    with pytest.raises(SweepError, match="point 0"):
        run_sweep(spec)


@pytest.mark.parametrize("kw", [dict(policy="lru"), dict(axis="x"), dict(trials=0), dict(values=(0,)),
                                dict(values=()), dict(axis="k")])
def test_spec_validation(kw):
    base = dict(name="x", policy="ppmm", beta=0.3, axis="n", values=(10,))
    base.update(kw)
    with pytest.raises(ValueError):
        ExperimentSpec(**base)


def test_spec_dict_roundtrip():
    spec = with_overrides(preset_fig6(), trials=7, seed=3, delta=None)
    assert ExperimentSpec.from_dict(spec.to_dict()) == spec
    assert spec.delta == 0.5


def test_m1_axis():
    spec = ExperimentSpec("m1", "ppmm", 0.3, "m1", (10, 40), m=40, n=40, trials=2)
    pts = spec.points()
    assert [p.m1 for p in pts] == [10, 40]
    assert all(p.config.M == p.m1 * p.k + 40 - p.m1 for p in pts)


def test_simulate_point_on_explicit_profile():
    c = SystemConfig(m=5, n=10, M=11, rho=0.8, beta=0.5)
    res = simulate_point(c, StorageProfile((4, 4, 1, 1, 1)), "ppmm", trials=4, seed=2)
    (rec,) = res.records
    assert rec.point.m1 == 2 and rec.point.k == 4 and len(rec.rates) == 4
    with pytest.raises(UnsupportedRegime):
        simulate_point(c, StorageProfile((4, 4, 1, 1, 1)), "ksmlp")
