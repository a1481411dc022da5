import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rbtc import distribution as dist
from rbtc.datasets import FAILURE_TIME, IRON_SHEET
from rbtc.distribution import RbtcParams
from rbtc.gof import (
    TABLE_COLUMNS,
    ComparisonRow,
    ad_pvalue,
    ad_statistic,
    cvm_pvalue,
    cvm_statistic,
    gof_report,
    ks_pvalue,
    ks_statistic,
)
from rbtc.sampling import RngStream, sample_record_mixture

from conftest import random_params

unit_samples = st.lists(st.floats(1e-6, 1 - 1e-6), min_size=2, max_size=60)


@given(unit_samples)
def test_ks_matches_scipy(u):
    assert ks_statistic(u) == pytest.approx(stats.kstest(u, "uniform").statistic, abs=1e-14)


@given(unit_samples)
def test_cvm_matches_scipy(u):
    assert cvm_statistic(u) == pytest.approx(stats.cramervonmises(u, "uniform").statistic, rel=1e-12)


@given(unit_samples)
def test_ad_matches_direct_formula(u):
    x = np.sort(u)
    n = x.size
    i = np.arange(1, n + 1)
    want = -n - np.mean((2 * i - 1) * (np.log(x) + np.log(1 - x[::-1])))
    assert ad_statistic(u) == pytest.approx(want, rel=1e-10, abs=1e-12)


@given(unit_samples)
def test_statistic_bounds(u):
    n = len(u)
    assert 0 <= ks_statistic(u) <= 1
    assert cvm_statistic(u) >= 1 / (12 * n) - 1e-15
    assert math.isfinite(ad_statistic(u)) and ad_statistic(u) >= -n


def test_perfect_fit_cvm():
    n = 37
    u = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    assert cvm_statistic(u) == 1 / (12 * n)


def test_ks_matches_brute_force_sup():
    rng = np.random.default_rng(0)
    for params in random_params(rng, 20, 0.05, 0.95):
        data = sample_record_mixture(params, RngStream(int(rng.integers(1 << 30))), 40)
        ks = gof_report(lambda x: dist.cdf(params, x), data).ks
        lo, hi = np.min(data) * 0.5, np.max(data) * 1.5
        grid = np.sort(np.concatenate([np.linspace(lo, hi, 100_000), data]))
        Fn_right = np.searchsorted(np.sort(data), grid, side="right") / data.size
        Fn_left = np.searchsorted(np.sort(data), grid, side="left") / data.size
        F = np.asarray(dist.cdf(params, grid))
        brute = max(np.max(np.abs(Fn_right - F)), np.max(np.abs(Fn_left - F)))
        assert abs(ks - brute) <= 1 / (2 * 10**5)


def test_invariant_under_monotone_relabelling():
    params = RbtcParams(1.5, 0.5, 0.3)
    x = sample_record_mixture(params, RngStream(8), 50)
    r1 = gof_report(lambda v: dist.cdf(params, v), x)
    u = np.asarray(dist.cdf(params, x))
    r2 = gof_report(lambda v: v, u)
    for f in ("ks", "ad", "cvm", "p_ks", "p_ad", "p_cvm"):
        assert getattr(r1, f) == pytest.approx(getattr(r2, f), rel=1e-12)


def test_pvalues_decrease_with_statistic():
    s = np.linspace(0.0, 6.0, 400)
    for pv in (lambda v: ks_pvalue(v / 4, 20), ad_pvalue, lambda v: cvm_pvalue(v / 4)):
        vals = np.array([pv(v) for v in s])
        assert np.all((vals >= 0) & (vals <= 1))
        assert np.all(np.diff(vals) <= 1e-15)


def test_cvm_limit_known_quantiles():
    # upper quantiles of the limiting CvM law: 10%, 5%, 1%, 0.1%
    for q, a in ((0.34730, 0.10), (0.46136, 0.05), (0.74346, 0.01), (1.16786, 0.001)):
        assert cvm_pvalue(q) == pytest.approx(a, rel=1e-3)


def test_ad_limit_known_quantiles():
    # upper quantiles of the limiting AD law: 10%, 5%, 1%
    for q, a in ((1.933, 0.10), (2.492, 0.05), (3.857, 0.01)):
        assert ad_pvalue(q) == pytest.approx(a, abs=1e-3)


def test_ks_pvalue_small_sample_correction():
    n, d = 20, 0.2
    lam = (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n)) * d
    assert ks_pvalue(d, n) == pytest.approx(stats.kstwobign.sf(lam), abs=1e-12)


def test_clamping_flag():
    r = gof_report(lambda v: np.where(v > 2, 1.0, v / 2), [0.5, 1.0, 3.0])
    assert r.clamped and math.isfinite(r.ad)
    assert not gof_report(lambda v: v / 4, [0.5, 1.0, 3.0]).clamped


def test_invalid_cdf_rejected():
    with pytest.raises(ValueError):
        gof_report(lambda v: v, [0.5, 2.0])


@pytest.mark.parametrize("data,params,ks,ad,cvm", [
    (FAILURE_TIME, (0.0837, 0.5628, 0.4424), 0.1477, 0.6191, 0.0642),
    (IRON_SHEET, (36.2939, 1.8817, 0.4872), 0.1039, None, None),
])
def test_published_statistics(data, params, ks, ad, cvm):
    p = RbtcParams(*params)
    r = gof_report(lambda v: dist.cdf(p, v), data.sample)
    assert r.ks == pytest.approx(ks, abs=0.002)
    if ad is not None:
        assert r.ad == pytest.approx(ad, abs=0.01)
        assert r.cvm == pytest.approx(cvm, abs=0.002)


def test_row_serialisation_order():
    r = gof_report(lambda v: v / 4, [0.5, 1.0, 3.0], neg2_loglik=12.5)
    row = ComparisonRow("W", r, (1.0, 2.0), (0.1, 0.2))
    assert TABLE_COLUMNS == ("model", "neg2_loglik", "ks", "ad", "cvm", "p_ks", "p_ad", "p_cvm", "params",
                             "std_errors")
    vals = row.values()
    assert vals[0] == "W" and vals[1] == 12.5 and vals[-2] == (1.0, 2.0)
    assert list(row.as_dict()) == list(TABLE_COLUMNS)
    assert ComparisonRow("C", r, (1.0, 2.0)).values()[-1] is None
