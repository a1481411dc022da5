"""The record-based transmuted Chen (RBTC) distribution.

With ``t = x**kappa`` and ``s = omega * (1 - exp(t)) <= 0`` the distribution
is

    F(x) = 1 - exp(s) * (1 - p * s)
    f(x) = omega * kappa * x**(kappa - 1) * exp(s + t) * (1 - p - p * s)

``p = 0`` is the Chen distribution. Every function below works in log space
so that ``exp(t)`` never has to be formed when it would overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .special import DomainError, WBranch, lambert_w, log1mexp

__all__ = [
    "RbtcParams",
    "MomentSeriesConfig",
    "MomentSeriesResult",
    "QuadratureError",
    "cdf",
    "pdf",
    "log_pdf",
    "log_cdf",
    "survival",
    "log_survival",
    "hazard",
    "quantile",
    "isf",
    "median",
    "raw_moment",
    "moment_series",
    "chen_cdf",
    "chen_pdf",
    "chen_quantile",
    "upper_support",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class RbtcParams:
    """Parameter triple ``(omega, kappa, p)``.

    ``p`` may sit on the closed endpoints 0 and 1 for evaluation; the
    estimators only ever produce interior values.
    """

    omega: float
    kappa: float
    p: float

    def __post_init__(self):
        for name in ("omega", "kappa", "p"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be positive and finite, got {self.omega}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise DomainError(f"kappa must be positive and finite, got {self.kappa}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"p must lie in [0, 1], got {self.p}")

    @property
    def p1(self) -> float:
        """Weight of the first upper record."""
        return 1.0 - self.p

    @property
    def p2(self) -> float:
        """Weight of the second upper record."""
        return self.p

    @property
    def is_interior(self) -> bool:
        return 0.0 < self.p < 1.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.omega, self.kappa, self.p)


@dataclass(frozen=True)
class MomentSeriesConfig:
    max_terms: int = 60
    term_tolerance: float = 1e-12
    quadrature_abs_tol: float = 1e-10

    def __post_init__(self):
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")
        if self.term_tolerance <= 0 or self.quadrature_abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class MomentSeriesResult:
    """Outcome of the series evaluation of ``E[X^r]``.

    ``value`` is complex because ``(-log omega)**(r - kappa - i)`` has no real
    value when ``omega > 1`` and ``r - kappa`` is not an integer.
    """

    value: complex
    quadrature_value: float
    ratio: complex
    terms_used: int
    converged: bool
    partial_sums: list[complex] = field(default_factory=list)


def _as_x(x, *, strict: bool):
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError("x contains NaN")
    if strict and np.any(arr <= 0):
        raise DomainError("x must be > 0")
    if not strict and np.any(arr < 0):
        raise DomainError("x must be >= 0")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def _log_expm1(t):
    # log(exp(t) - 1) for t >= 0, finite for t far beyond the exp overflow point.
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(t > 30.0, t + np.log1p(-np.exp(-np.minimum(t, 745.0))),
                        np.log(np.expm1(np.minimum(t, 30.0))))


def _pieces(params: RbtcParams, x):
    with np.errstate(divide="ignore", over="ignore"):
        t = x**params.kappa
        s = -params.omega * np.expm1(t)
    return t, s


def _log_one_minus_ps(params: RbtcParams, t):
    # log(1 - p*s) where -s = omega*expm1(t) >= 0.
    if params.p == 0.0:
        return np.zeros_like(t)
    with np.errstate(divide="ignore"):
        log_neg_s = math.log(params.omega) + _log_expm1(t)
        return np.logaddexp(0.0, math.log(params.p) + log_neg_s)


def _log_density_factor(params: RbtcParams, t):
    # log(1 - p - p*s), a sum of two nonnegative terms.
    if params.p == 0.0:
        return np.zeros_like(t)
    with np.errstate(divide="ignore"):
        log_neg_s = math.log(params.omega) + _log_expm1(t)
        log_1mp = math.log1p(-params.p) if params.p < 1.0 else -np.inf
        return np.logaddexp(log_1mp, math.log(params.p) + log_neg_s)


def log_survival(params: RbtcParams, x):
    """``log S(x) = s + log(1 - p s)``."""
    x = _as_x(x, strict=False)
    t, s = _pieces(params, x)
    with np.errstate(invalid="ignore"):
        out = s + _log_one_minus_ps(params, t)
    out = np.where(np.isneginf(s), -np.inf, out)
    return _out(out)


def survival(params: RbtcParams, x):
    """Survival function, computed directly rather than as ``1 - cdf``."""
    return _out(np.exp(log_survival(params, x)))


def cdf(params: RbtcParams, x):
    """Cumulative distribution function."""
    ls = np.asarray(log_survival(params, x))
    return _out(-np.expm1(ls) + 0.0)  # + 0.0 turns -0.0 into 0.0


def log_cdf(params: RbtcParams, x):
    ls = np.asarray(log_survival(params, x))
    with np.errstate(divide="ignore"):
        return _out(np.asarray(log1mexp(np.minimum(ls, 0.0))))


def log_pdf(params: RbtcParams, x):
    """Log density.

    ``-inf`` appears only where the density is exactly zero in double
    precision: the ``p = 1`` factor at ``x -> 0`` and the far right tail where
    ``omega * exp(x**kappa)`` itself overflows.
    """
    x = _as_x(x, strict=True)
    t, s = _pieces(params, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (math.log(params.omega) + math.log(params.kappa) + (params.kappa - 1.0) * np.log(x)
               + s + t + _log_density_factor(params, t))
    out = np.where(np.isneginf(s), -np.inf, out)
    return _out(out)


def pdf(params: RbtcParams, x):
    """Probability density function."""
    return _out(np.exp(log_pdf(params, x)))


def hazard(params: RbtcParams, x):
    """Hazard rate ``f / S``.

    The ``exp(s)`` factors cancel analytically, which keeps this finite in
    the far right tail where both ``f`` and ``S`` underflow.
    """
    x = _as_x(x, strict=True)
    with np.errstate(over="ignore", divide="ignore"):
        t = x**params.kappa
        log_h = (math.log(params.omega) + math.log(params.kappa) + (params.kappa - 1.0) * np.log(x)
                 + t + _log_density_factor(params, t) - _log_one_minus_ps(params, t))
        return _out(np.exp(log_h))


def chen_cdf(omega: float, kappa: float, x):
    x = _as_x(x, strict=False)
    with np.errstate(over="ignore"):
        return _out(-np.expm1(-omega * np.expm1(x**kappa)))


def chen_pdf(omega: float, kappa: float, x):
    x = _as_x(x, strict=True)
    with np.errstate(over="ignore", invalid="ignore"):
        t = x**kappa
        out = omega * kappa * x ** (kappa - 1.0) * np.exp(omega * -np.expm1(t) + t)
    return _out(np.where(np.isfinite(out), out, 0.0))


def chen_quantile(omega: float, kappa: float, u):
    """Inverse of the Chen CDF, ``[log(1 - log(1 - u)/omega)]**(1/kappa)``."""
    u = np.asarray(u, dtype=float)
    return _out(np.log1p(-np.log1p(-u) / omega) ** (1.0 / kappa))


def _chen_isf_log(omega: float, kappa: float, log_sf):
    return np.log1p(-log_sf / omega) ** (1.0 / kappa)


def _quantile_from_log_sf(params: RbtcParams, log_sf):
    """Solve ``log S(x) = log_sf`` for x (``log_sf < 0``)."""
    log_sf = np.asarray(log_sf, dtype=float)
    p, omega, kappa = params.p, params.omega, params.kappa
    if p < 1e-12:
        return _chen_isf_log(omega, kappa, log_sf)
    # S = exp(s)(1 - p s). With s = v + 1/p: v e^v = -(1 - u) / (p e^{1/p}).
    log_z = log_sf - 1.0 / p - math.log(p)
    z = -np.exp(log_z)
    # 1/p + log p >= 1 on (0, 1] keeps z inside [-1/e, 0).
    if np.any(log_z > -1.0 + 1e-12):
        raise DomainError("Lambert W argument left [-1/e, 0)")
    underflow = z == 0.0
    z_safe = np.where(underflow, -1e-300, z)
    v = lambert_w(z_safe, WBranch.MINUS_ONE)
    # Large-|v| asymptote when z underflows: v = log_z - log(-v) iterated.
    if np.any(underflow):
        va = log_z.copy()
        for _ in range(60):
            va = log_z - np.log(-va)
        v = np.where(underflow, va, v)
    s = v + 1.0 / p
    s = np.minimum(s, 0.0)
    # Newton polish of s + log(1 - p s) = log_sf; removes cancellation in v + 1/p.
    for _ in range(3):
        g = s + np.log1p(-p * s) - log_sf
        dg = 1.0 - p / (1.0 - p * s)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg != 0, g / dg, 0.0)
        s = np.minimum(s - step, 0.0)
    return np.log1p(-s / omega) ** (1.0 / kappa)


def quantile(params: RbtcParams, u):
    """Quantile function via the ``-1`` branch of Lambert W.

    ``x = [log(1 - s/omega)]**(1/kappa)`` with ``s = W_{-1}((u - 1)/(p e^{1/p})) + 1/p``.
    """
    u_arr = np.asarray(u, dtype=float)
    if np.any(~((u_arr > 0) & (u_arr < 1))):
        raise DomainError("quantile requires 0 < u < 1")
    return _out(_quantile_from_log_sf(params, np.log1p(-u_arr)))


def isf(params: RbtcParams, q):
    """Inverse survival function; accurate for tiny tail probabilities."""
    q_arr = np.asarray(q, dtype=float)
    if np.any(~((q_arr > 0) & (q_arr < 1))):
        raise DomainError("isf requires 0 < q < 1")
    return _out(_quantile_from_log_sf(params, np.log(q_arr)))


def median(params: RbtcParams) -> float:
    return quantile(params, 0.5)


def upper_support(params: RbtcParams, tail: float = 1e-14) -> float:
    """Point beyond which the survival probability is below ``tail``."""
    return float(isf(params, tail))


def raw_moment(params: RbtcParams, r: int, cfg: MomentSeriesConfig | None = None) -> float:
    """``E[X^r]`` by adaptive Gauss-Kronrod quadrature of ``x^r f(x)``."""
    if r < 1 or int(r) != r:
        raise ValueError("r must be a positive integer")
    cfg = cfg or MomentSeriesConfig()
    x_max = upper_support(params)
    med = median(params)

    def integrand(x):
        return x**r * pdf(params, x) if x > 0 else 0.0

    total = 0.0
    err = 0.0
    for a, b in ((0.0, med), (med, x_max)):
        val, e = integrate.quad(integrand, a, b, epsabs=cfg.quadrature_abs_tol, epsrel=1e-12, limit=500)
        total += val
        err += e
    if err > max(cfg.quadrature_abs_tol, 1e-9 * abs(total)):
        raise QuadratureError(f"raw moment r={r}: achieved error estimate {err:.3g}")
    return total


def _j_integral(i: int, m: int, omega: float, abs_tol: float) -> float:
    """``J(i, m, omega) = int_omega^inf (log t)^i e^{-t} t^m dt``."""

    def f(t):
        return math.log(t) ** i * math.exp(-t) * t**m

    pieces = [(omega, max(omega, 1.0) + 50.0 + 5.0 * i)]
    total = 0.0
    for a, b in pieces:
        val, _ = integrate.quad(f, a, b, epsabs=abs_tol, epsrel=1e-12, limit=500)
        total += val
    tail, _ = integrate.quad(f, pieces[-1][1], np.inf, epsabs=abs_tol, limit=200)
    return total + tail


def moment_series(params: RbtcParams, r: int, cfg: MomentSeriesConfig | None = None) -> MomentSeriesResult:
    """Binomial-series representation of ``E[X^r]`` in terms of ``J(i, m, omega)``.

    Evaluated exactly as the closed form is written, exponent ``r - kappa``
    included, and compared against :func:`raw_moment`. The series is summed
    until a term falls below ``cfg.term_tolerance``; if that never happens
    within ``cfg.max_terms`` the result is flagged as not converged.
    """
    cfg = cfg or MomentSeriesConfig()
    omega, kappa, p = params.as_tuple()
    a = r - kappa
    base = complex(-math.log(omega))
    lead = math.exp(omega)
    c0 = 1.0 - p * omega - p

    partial = 0j
    partial_sums = []
    converged = False
    used = 0
    for i in range(cfg.max_terms):
        coef = special.binom(a, i)
        used = i + 1
        if coef == 0.0:
            term = 0j
        else:
            bracket = c0 * _j_integral(i, 0, omega, cfg.quadrature_abs_tol)
            if p:
                bracket += p * _j_integral(i, 1, omega, cfg.quadrature_abs_tol)
            if base == 0:
                term = lead * coef * bracket if a - i == 0 else 0j
            else:
                term = lead * coef * base ** (a - i) * bracket
        if not np.isfinite(term):
            break
        partial += term
        partial_sums.append(partial)
        if abs(term) < cfg.term_tolerance:
            converged = True
            break

    quad = raw_moment(params, r, cfg)
    return MomentSeriesResult(
        value=partial,
        quadrature_value=quad,
        ratio=partial / quad,
        terms_used=used,
        converged=converged,
        partial_sums=partial_sums,
    )
