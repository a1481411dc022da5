import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special as sc

from rbtc.special import DomainError, WBranch, kolmogorov_sf, lambert_w, log1mexp

INV_E = math.exp(-1.0)
mpmath.mp.dps = 50


def _tol(w, z):
    # W is ill-conditioned near -1/e: an input rounding of |z| eps moves w by
    # about |z| eps / (e^w |1 + w|).
    return 1e-13 * abs(w) + 4 * np.finfo(float).eps * abs(z) / (math.exp(w) * abs(1.0 + w) + 1e-300)


@pytest.mark.parametrize("z", [-INV_E + 1e-12, -0.3, -0.1, -1e-5, 0.0, 1e-8, 0.5, 1.0, math.e, 10.0, 1e6, 1e300])
def test_principal_matches_mpmath(z):
    want = float(mpmath.lambertw(mpmath.mpf(z), 0).real)
    got = lambert_w(z)
    assert abs(got - want) <= _tol(want, z) + 1e-300


@pytest.mark.parametrize("z", [-INV_E + 1e-12, -0.3, -0.1, -1e-3, -1e-10, -1e-100, -1e-300])
def test_minus_one_matches_mpmath(z):
    want = float(mpmath.lambertw(mpmath.mpf(z), -1).real)
    assert abs(lambert_w(z, WBranch.MINUS_ONE) - want) <= _tol(want, z)


@pytest.mark.parametrize("branch,k", [(WBranch.MINUS_ONE, -1), (WBranch.PRINCIPAL, 0)])
def test_vectorised_matches_mpmath(branch, k):
    if k == -1:
        z = -np.logspace(-200, math.log10(INV_E) - 1e-9, 200)
    else:
        z = np.linspace(-INV_E + 1e-9, 50.0, 200)
    got = lambert_w(z, branch)
    for zi, wi in zip(z, got):
        want = float(mpmath.lambertw(mpmath.mpf(zi), k).real)
        assert abs(wi - want) <= _tol(want, zi)


def test_agrees_with_scipy_away_from_branch_point():
    z = np.linspace(-0.3, 50.0, 500)
    assert np.allclose(lambert_w(z), sc.lambertw(z, 0).real, rtol=1e-13, atol=1e-15)
    z = -np.logspace(-200, math.log10(0.3), 500)
    assert np.allclose(lambert_w(z, WBranch.MINUS_ONE), sc.lambertw(z, -1).real, rtol=1e-13)


@given(st.floats(min_value=-INV_E, max_value=1e100))
def test_principal_inverts(z):
    w = lambert_w(z)
    assert w >= -1.0
    assert w * math.exp(w) == pytest.approx(z, rel=1e-12, abs=1e-14)


@given(st.floats(min_value=-INV_E, max_value=-1e-300))
def test_minus_one_inverts_and_stays_on_branch(z):
    w = lambert_w(z, WBranch.MINUS_ONE)
    assert w <= -1.0
    assert w * math.exp(w) == pytest.approx(z, rel=1e-11, abs=1e-15)


def test_branch_point():
    assert lambert_w(-INV_E) == -1.0
    assert lambert_w(-INV_E, WBranch.MINUS_ONE) == -1.0


@pytest.mark.parametrize("z,branch", [(-0.5, WBranch.PRINCIPAL), (0.0, WBranch.MINUS_ONE),
                                      (1.0, WBranch.MINUS_ONE), (float("nan"), WBranch.PRINCIPAL)])
def test_domain_errors(z, branch):
    with pytest.raises(DomainError):
        lambert_w(z, branch)


@pytest.mark.parametrize("a", [-1e-300, -1e-20, -1e-8, -0.1, -math.log(2), -1.0, -30.0, -800.0])
def test_log1mexp(a):
    want = float(mpmath.log(-mpmath.expm1(mpmath.mpf(a))))
    assert log1mexp(a) == pytest.approx(want, rel=1e-14)


def test_log1mexp_edges():
    assert log1mexp(0.0) == -math.inf
    with pytest.raises(DomainError):
        log1mexp(1e-3)


def test_kolmogorov_sf_matches_scipy():
    lam = np.concatenate([[0.0, 1e-3], np.linspace(0.05, 4.0, 300)])
    assert np.allclose(kolmogorov_sf(lam), sc.kolmogorov(lam), atol=1e-12)


def test_kolmogorov_sf_shape():
    lam = np.linspace(0.0, 5.0, 400)
    vals = kolmogorov_sf(lam)
    assert vals[0] == 1.0
    assert np.all(np.diff(vals) <= 1e-15)
    assert np.all((vals >= 0) & (vals <= 1))
    assert kolmogorov_sf(-1.0) == 1.0
