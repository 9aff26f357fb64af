import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from hetcache.popularity import RequestBatch, batch_size, build_popularity, make_rng, sample_batch


def test_uniform_when_beta_zero():
    np.testing.assert_allclose(build_popularity(3, 0).pmf, [1 / 3] * 3, rtol=0, atol=1e-15)


def test_single_file():
    assert build_popularity(1, 2.7).pmf.tolist() == [1.0]


def test_harmonic_four_files():
    # 1 / (1 + 1/2 + 1/3 + 1/4) = 12/25
    np.testing.assert_allclose(build_popularity(4, 1).pmf, [0.48, 0.24, 0.16, 0.12], atol=1e-15)


@pytest.mark.parametrize("n", [0, -3, 2.5])
def test_rejects_bad_file_count(n):
    with pytest.raises(ValueError):
        build_popularity(n, 1.0)


@pytest.mark.parametrize("beta", [-0.1, math.nan, math.inf])
def test_rejects_bad_beta(beta):
    with pytest.raises(ValueError):
        build_popularity(10, beta)


@pytest.mark.parametrize("n", [1, 7, 1000, 10**6])
@pytest.mark.parametrize("beta", [0, 0.3, 0.6, 1.0, 1.2, 2.0])
def test_pmf_normalised_and_zipf_shaped(n, beta):
    model = build_popularity(n, beta)
    assert abs(math.fsum(model.pmf.tolist()) - 1.0) <= 1e-12
    assert np.all(np.diff(model.pmf) <= 0)
    idx = np.unique(np.linspace(1, n, 50).astype(int))
    np.testing.assert_allclose(model.pmf[idx - 1], model.p1 * idx ** -beta, rtol=1e-12)
    assert model.cdf[-1] == 1.0


def test_model_arrays_are_read_only():
    model = build_popularity(5, 1.0)
    with pytest.raises(ValueError):
        model.pmf[0] = 0.5


def test_batch_size_floor():
    assert batch_size(400, 0.97) == 388
    assert batch_size(100, 0.29) == 29
    assert batch_size(3, 0.7) == 2


def test_empty_batch():
    b = sample_batch(build_popularity(5, 1.0), 0, 3)
    assert b.size == 0
    assert b.counts.tolist() == [0] * 5


@given(st.integers(0, 2**64 - 1), st.integers(0, 300), st.integers(1, 50),
       st.sampled_from([0.0, 0.3, 1.2, 2.0]))
def test_batch_invariants_and_determinism(seed, size, n, beta):
    model = build_popularity(n, beta)
    a = sample_batch(model, size, seed)
    b = sample_batch(model, size, seed)
    assert a.requests.tobytes() == b.requests.tobytes()
    assert a.size == size and int(a.counts.sum()) == size
    if size:
        assert 1 <= a.requests.min() and a.requests.max() <= n
    for i in range(1, n + 1):
        assert a.count(i) == int(np.sum(a.requests == i))


def test_different_seeds_give_different_batches():
    model = build_popularity(100, 0.3)
    assert sample_batch(model, 388, 1).requests.tolist() != sample_batch(model, 388, 2).requests.tolist()


def test_uniform_frequencies_within_three_sigma():
    b = sample_batch(build_popularity(10, 0), 10**5, 11)
    tol = 3 * math.sqrt(0.1 * 0.9 / 10**5)
    inside = np.abs(b.counts / 10**5 - 0.1) <= tol
    assert inside.sum() >= 9


@pytest.mark.parametrize("n,beta,seed", [(10, 0.3, 1), (50, 1.2, 2), (100, 2.0, 3), (100, 0.0, 4)])
def test_chi_square_goodness_of_fit(n, beta, seed):
    model = build_popularity(n, beta)
    b = sample_batch(model, 10**5, seed)
    expected = model.pmf * 10**5
    # pool sparse cells so every expected count is at least 5
    keep = expected >= 5
    obs = np.append(b.counts[keep], b.counts[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] == 0:
        obs, exp = obs[:-1], exp[:-1]
    assert stats.chisquare(obs, exp).pvalue > 0.001


def test_from_requests_rejects_out_of_range():
    with pytest.raises(ValueError):
        RequestBatch.from_requests([0, 1], 3)
    with pytest.raises(ValueError):
        RequestBatch.from_requests([4], 3)


def test_generator_is_pcg64():
    assert isinstance(make_rng(5).bit_generator, np.random.PCG64)
