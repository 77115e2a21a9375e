import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad
from scipy.special import ndtr

from lapspec import evt
from lapspec.errors import DomainError, InvalidArgumentError
from lapspec.rand_models import SeedPath
from lapspec.stats import ks_one_sample, ks_two_sample

# mpmath at 40 digits
A_1000 = 3.716922188849838447
B_PRIME_1000 = 3.116469885291314050
B_1000 = 3.385509684671520939
GUMBEL_AT_1 = 0.69220062755534635387

BIG_N = 10 ** 6
BIG_TRIALS = 10 ** 5


@pytest.mark.parametrize("n", [10, 1000, 10 ** 6])
def test_centering_difference(n):
    c = evt.constants(n)
    assert c.b_n - c.b_n_prime == pytest.approx(1 / math.sqrt(2 * math.log(n)), rel=1e-14)


def test_constants_at_1000():
    c = evt.constants(1000)
    assert c.a_n == math.sqrt(2 * math.log(1000))
    assert abs(c.a_n - A_1000) <= 1e-15
    assert abs(c.b_n_prime - B_PRIME_1000) <= 1e-14
    assert abs(c.b_n - B_1000) <= 1e-14


@pytest.mark.parametrize("e", range(3, 9))
def test_centering_identity(e):
    n = 10 ** e
    c = evt.constants(n)
    rhs = (math.log(math.log(n)) + math.log(4 * math.pi) - 2) / 2
    assert c.a_n * (c.a_n - c.b_n) == pytest.approx(rhs, rel=1e-12)
    assert 0 < c.b_n < c.a_n


def test_constants_domain():
    with pytest.raises(DomainError):
        evt.constants(2)


def test_rescale():
    c = evt.constants(1000)
    assert c.rescale(c.b_n) == 0.0
    assert c.rescale(c.b_n_prime, "iid") == 0.0
    assert c.rescale(c.b_n + 1 / c.a_n) == pytest.approx(1.0, rel=1e-14)


def test_gumbel_values():
    assert evt.gumbel_cdf(0.0) == math.exp(-1)
    assert evt.gumbel_cdf(-50.0) < 1e-300
    assert 1 - evt.gumbel_cdf(50.0) < 1e-21
    assert abs(evt.gumbel_cdf(1.0) - GUMBEL_AT_1) <= 1e-15
    assert isinstance(evt.gumbel_cdf(0.5), float)


@given(st.floats(-20, 20), st.floats(0, 5))
def test_gumbel_monotone(x, h):
    assert evt.gumbel_cdf(x) <= evt.gumbel_cdf(x + h)


def test_sample_gumbel_matches_cdf():
    assert ks_one_sample(evt.sample_gumbel(20_000, 3), evt.gumbel_cdf).passed


# -- order-statistics oracle ---------------------------------------------------

def test_topk_single():
    s = evt.sample_gaussian_topk(1, 1, 5)
    assert s.k == 1 and s.values.shape == (1,)


def test_topk_rejects_k_above_n():
    with pytest.raises(InvalidArgumentError):
        evt.sample_gaussian_topk(3, 4, 1)
    with pytest.raises(InvalidArgumentError):
        evt.sample_gaussian_topk(3, 2, 1, method="bogus")


@given(st.integers(1, 200), st.integers(1, 20), st.integers(0, 2 ** 32))
def test_topk_strictly_descending(n, k, seed):
    k = min(k, n)
    for method in ("renyi", "direct"):
        v = evt.sample_gaussian_topk(n, k, seed, method).values
        assert v.shape == (k,) and np.all(np.diff(v) < 0)


def test_renyi_agrees_with_direct_sorting():
    n, k, trials = 500, 3, 3000
    renyi = evt.gaussian_topk_batch(n, k, trials, SeedPath(1, (0,)))
    direct = np.array([evt.sample_gaussian_topk(n, k, SeedPath(1, (1, i)), "direct").values
                       for i in range(trials)])
    for j in range(k):
        assert ks_two_sample(renyi[:, j], direct[:, j]).passed


def test_renyi_max_matches_exact_finite_law():
    # P(max <= x) = Phi(x)^n exactly; this is the law the oracle must reproduce
    n = BIG_N
    top = evt.gaussian_topk_batch(n, 1, BIG_TRIALS, SeedPath(2, (0,)))[:, 0]
    assert ks_one_sample(top, lambda x: ndtr(x) ** n).passed


def test_rescaled_max_vs_gumbel_at_large_n():
    # the exact finite-n distance sup|Phi(b' + x/a)^n - F(x)| is already 0.031 at n = 10^6
    c = evt.constants(BIG_N)
    top = evt.gaussian_topk_batch(BIG_N, 1, BIG_TRIALS, SeedPath(3, (0,)))[:, 0]
    rep = ks_one_sample(c.rescale(top, "iid"), evt.gumbel_cdf)
    assert rep.statistic <= 0.01, rep.summary()


def test_rescaled_max_vs_direct_gumbel_two_sample():
    c = evt.constants(BIG_N)
    top = evt.gaussian_topk_batch(BIG_N, 1, BIG_TRIALS, SeedPath(4, (0,)))[:, 0]
    g = evt.sample_gumbel(BIG_TRIALS, SeedPath(4, (1,)))
    rep = ks_two_sample(c.rescale(top, "iid"), g)
    assert rep.statistic <= 0.012, rep.summary()


def test_rescaled_gap_mean_at_large_n():
    c = evt.constants(BIG_N)
    top = evt.gaussian_topk_batch(BIG_N, 2, BIG_TRIALS, SeedPath(5, (0,)))
    gap = c.a_n * (top[:, 0] - top[:, 1])
    se = gap.std(ddof=1) / math.sqrt(gap.size)
    assert np.all(gap > 0)
    assert abs(gap.mean() - 1) <= 3 * se, f"mean gap {gap.mean():.4f}, se {se:.4f}"


@pytest.mark.parametrize("a", [0.0, 1.0, 2.0])
def test_top_statistics_count_means_at_large_n(a):
    c = evt.constants(BIG_N)
    top = evt.gaussian_topk_batch(BIG_N, 40, 10 ** 4, SeedPath(6, (int(a),)))
    counts = (c.rescale(top, "iid") >= a).sum(axis=1)
    assert counts.max() < 40
    assert abs(counts.mean() - math.exp(-a)) <= 0.05 * math.exp(-a), f"mean {counts.mean():.4f}"


# -- point process and spacing ------------------------------------------------------

def test_ppp_interval_mean():
    assert evt.ppp_interval_mean(0.0) == 1.0
    assert evt.ppp_interval_mean(math.log(2)) == pytest.approx(0.5, rel=1e-15)
    q = quad(lambda x: math.exp(-x), -1, 40)[0]
    assert abs(evt.ppp_interval_mean(-1.0) - q) <= 1e-12


def test_spacing_threshold():
    assert evt.spacing_threshold(math.e, 1, 0.25) == pytest.approx(1.0, rel=1e-15)
    assert evt.spacing_threshold(1000) == math.log(1000) ** -0.75
    ns = np.geomspace(10, 1e9, 10)
    vals = [evt.spacing_threshold(n) for n in ns]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(DomainError):
        evt.spacing_threshold(1)
    with pytest.raises(InvalidArgumentError):
        evt.spacing_threshold(100, 1, 0.0)
