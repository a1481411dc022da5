import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, optimize

from rbtc import distribution as dist
from rbtc.distribution import MomentSeriesConfig, RbtcParams
from rbtc.special import DomainError

from conftest import CASES, random_params

mpmath.mp.dps = 40

params_st = st.builds(
    RbtcParams,
    st.floats(0.05, 20.0),
    st.floats(0.2, 4.0),
    st.floats(0.0, 1.0),
)


def mp_cdf(params, x):
    w, k, p = (mpmath.mpf(v) for v in params.as_tuple())
    s = w * (1 - mpmath.exp(mpmath.mpf(x) ** k))
    return 1 - mpmath.exp(s) * (1 - p * s)


def mp_log_sf(params, x):
    w, k, p = (mpmath.mpf(v) for v in params.as_tuple())
    s = w * (1 - mpmath.exp(mpmath.mpf(x) ** k))
    return s + mpmath.log(1 - p * s)


def mp_pdf(params, x):
    w, k, p = (mpmath.mpf(v) for v in params.as_tuple())
    x = mpmath.mpf(x)
    t = x**k
    s = w * (1 - mpmath.exp(t))
    return w * k * x ** (k - 1) * mpmath.exp(s + t) * (1 - p - p * s)


@pytest.mark.parametrize("bad", [(0, 1, 0.5), (-1, 1, 0.5), (1, 0, 0.5), (1, math.inf, 0.5),
                                 (1, 1, -0.01), (1, 1, 1.01), (math.nan, 1, 0.5)])
def test_params_validation(bad):
    with pytest.raises(DomainError):
        RbtcParams(*bad)


def test_params_accessors():
    p = RbtcParams(2, 1, 0.3)
    assert (p.p1, p.p2) == (pytest.approx(0.7), 0.3)
    assert p.is_interior and not RbtcParams(2, 1, 0).is_interior
    assert p.as_tuple() == (2.0, 1.0, 0.3)


def test_cdf_pdf_match_mpmath(case):
    x = np.asarray(dist.quantile(case, np.array([1e-6, 0.01, 0.3, 0.5, 0.9, 0.999])))
    for xi, F, f in zip(x, dist.cdf(case, x), dist.pdf(case, x)):
        assert F == pytest.approx(float(mp_cdf(case, xi)), rel=1e-12)
        assert f == pytest.approx(float(mp_pdf(case, xi)), rel=1e-12)


def test_tail_matches_mpmath(case):
    x = float(dist.isf(case, 1e-200))
    want = mp_log_sf(case, x)
    assert dist.log_survival(case, x) == pytest.approx(float(want), rel=1e-10)
    assert dist.log_pdf(case, x) == pytest.approx(float(mpmath.log(mp_pdf(case, x))), rel=1e-10)


@given(params_st, st.floats(1e-3, 0.999))
def test_cdf_plus_survival_is_one(params, u):
    x = dist.quantile(params, u)
    assert dist.cdf(params, x) + dist.survival(params, x) == pytest.approx(1.0, abs=1e-14)


def test_cdf_limits_and_monotone(case):
    x = np.concatenate([[0.0], np.logspace(-8, math.log10(float(dist.isf(case, 1e-300))), 2000)])
    F = np.asarray(dist.cdf(case, x))
    assert F[0] == 0.0
    assert F[-1] == 1.0
    assert np.all(np.diff(F) >= 0)


def test_pdf_is_derivative_of_cdf():
    rng = np.random.default_rng(7)
    for params in random_params(rng, 20):
        x = np.asarray(dist.quantile(params, np.linspace(0.02, 0.98, 25)))
        h = 1e-6 * x
        fd = (np.asarray(dist.cdf(params, x + h)) - np.asarray(dist.cdf(params, x - h))) / (2 * h)
        f = np.asarray(dist.pdf(params, x))
        assert np.max(np.abs(fd - f) / f) < 1e-5


def test_density_integrates_to_one(case):
    med = dist.median(case)
    top = float(dist.isf(case, 1e-17))
    total = sum(integrate.quad(lambda x: dist.pdf(case, x), a, b, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
                for a, b in ((0.0, med), (med, top)))
    assert total == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("u", np.concatenate([np.logspace(-15, -1, 8), np.linspace(0.1, 0.9, 9),
                                               1 - np.logspace(-1, -12, 6)]))
def test_quantile_round_trip(case, u):
    x = dist.quantile(case, u)
    assert abs(dist.cdf(case, x) - u) < 1e-10
    # relative accuracy in the lower tail too
    assert dist.cdf(case, x) == pytest.approx(u, rel=1e-9)


@pytest.mark.parametrize("q", [1e-300, 1e-100, 1e-20, 1e-8, 0.3])
def test_isf_round_trip(case, q):
    x = dist.isf(case, q)
    assert dist.log_survival(case, x) == pytest.approx(math.log(q), rel=1e-12)


def test_quantile_matches_bisection(case):
    for u in (1e-4, 0.25, 0.5, 0.75, 0.9999):
        hi = 1.0
        while dist.cdf(case, hi) < u:
            hi *= 2
        root = optimize.brentq(lambda x: dist.cdf(case, x) - u, 0.0, hi, xtol=1e-15, rtol=1e-15)
        assert dist.quantile(case, u) == pytest.approx(root, rel=1e-10)


@given(params_st, st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_quantile_monotone(params, u1, u2):
    u1, u2 = sorted((min(max(u1, 1e-12), 1 - 1e-12), min(max(u2, 1e-12), 1 - 1e-12)))
    assert dist.quantile(params, u1) <= dist.quantile(params, u2)


def test_quantile_domain():
    p = CASES["I"]
    for u in (0.0, 1.0, -0.1, math.nan):
        with pytest.raises(DomainError):
            dist.quantile(p, u)
    with pytest.raises(DomainError):
        dist.pdf(p, 0.0)
    with pytest.raises(DomainError):
        dist.cdf(p, -1.0)


@given(st.floats(0.05, 20.0), st.floats(0.2, 4.0), st.floats(1e-3, 0.999))
def test_p_zero_is_chen(omega, kappa, u):
    params = RbtcParams(omega, kappa, 0.0)
    x = dist.chen_quantile(omega, kappa, u)
    assert abs(dist.cdf(params, x) - dist.chen_cdf(omega, kappa, x)) < 1e-13
    assert dist.pdf(params, x) == pytest.approx(dist.chen_pdf(omega, kappa, x), rel=1e-13)
    assert dist.quantile(params, u) == pytest.approx(x, rel=1e-13)


def test_chen_closed_form():
    omega, kappa, x = 0.7, 1.3, np.array([0.2, 0.9, 1.5])
    assert np.allclose(dist.chen_cdf(omega, kappa, x), 1 - np.exp(omega * (1 - np.exp(x**kappa))), rtol=1e-14)


@given(params_st, st.floats(1e-3, 0.999))
def test_record_mixture_identity(params, u):
    # F = (1-p) G + p G2 with G2 the second upper-record CDF of Chen.
    x = dist.quantile(params, u)
    G = dist.chen_cdf(params.omega, params.kappa, x)
    G2 = 1 - (1 - G) * (1 - math.log1p(-G))
    assert dist.cdf(params, x) == pytest.approx((1 - params.p) * G + params.p * G2, abs=1e-12)


def test_hazard_is_pdf_over_survival(case):
    x = np.asarray(dist.quantile(case, np.linspace(0.01, 0.99, 30)))
    h = np.asarray(dist.hazard(case, x))
    assert np.allclose(h, np.asarray(dist.pdf(case, x)) / np.asarray(dist.survival(case, x)), rtol=1e-11)
    # stays finite where f and S both underflow
    far = float(dist.isf(case, 1e-300)) * 1.5
    assert dist.survival(case, far) == 0.0
    assert np.isfinite(dist.hazard(case, far)) and dist.hazard(case, far) > 0


def test_likelihood_ratio_monotone_in_p():
    # f(x; p2) / f(x; p1) is nondecreasing in x whenever p1 < p2.
    rng = np.random.default_rng(11)
    for _ in range(20):
        base = random_params(rng, 1)[0]
        p1, p2 = np.sort(rng.uniform(0.0, 1.0, 2))
        a = RbtcParams(base.omega, base.kappa, p1)
        b = RbtcParams(base.omega, base.kappa, p2)
        x = np.asarray(dist.quantile(a, np.linspace(1e-4, 1 - 1e-6, 400)))
        lr = np.asarray(dist.log_pdf(b, x)) - np.asarray(dist.log_pdf(a, x))
        assert np.all(np.diff(lr) >= -1e-12)


def test_raw_moment_matches_mpmath_quadrature():
    params = CASES["III"]
    got = dist.raw_moment(params, 1)
    # x f(x) beyond isf(1e-30) contributes far less than the tolerance
    top = float(dist.isf(params, 1e-30))
    want = mpmath.quad(lambda x: x * mp_pdf(params, x), [0, dist.median(params), top])
    assert got == pytest.approx(float(want), rel=1e-9)


def test_raw_moment_second_moment_consistency(case):
    # E[X^2] via the survival identity 2 * int x S(x) dx.
    m2 = dist.raw_moment(case, 2)
    top = float(dist.isf(case, 1e-17))
    alt, _ = integrate.quad(lambda x: 2 * x * dist.survival(case, x), 0, top, limit=200, epsabs=1e-12)
    assert m2 == pytest.approx(alt, rel=1e-8)


def test_raw_moment_rejects_bad_order():
    with pytest.raises(ValueError):
        dist.raw_moment(CASES["I"], 0)
    with pytest.raises(ValueError):
        dist.raw_moment(CASES["I"], 1.5)


def test_moment_series_reports_diagnostics(case):
    res = dist.moment_series(case, 1, MomentSeriesConfig(max_terms=25))
    assert res.quadrature_value == pytest.approx(dist.raw_moment(case, 1))
    assert len(res.partial_sums) <= res.terms_used
    if res.partial_sums:
        assert res.value == res.partial_sums[-1]
    assert res.ratio == pytest.approx(res.value / res.quadrature_value)


def test_moment_series_terminates_for_integer_exponent():
    # kappa = 1 and r = 1 make the binomial series finite.
    res = dist.moment_series(RbtcParams(2.0, 1.0, 0.5), 1)
    assert res.converged and res.terms_used == 2
    assert np.isfinite(res.ratio)


def test_moment_series_config_validation():
    with pytest.raises(ValueError):
        MomentSeriesConfig(max_terms=0)
    with pytest.raises(ValueError):
        MomentSeriesConfig(term_tolerance=0)
