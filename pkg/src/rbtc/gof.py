"""Goodness-of-fit statistics for fitted lifetime models.

The p-values use the classical asymptotics for a fully specified null and
ignore the effect of estimating the parameters, so they are optimistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special as sc

from .data import as_sample
from .special import kolmogorov_sf

__all__ = [
    "GofReport",
    "ks_statistic",
    "ad_statistic",
    "cvm_statistic",
    "ks_pvalue",
    "ad_pvalue",
    "cvm_pvalue",
    "gof_report",
    "ComparisonRow",
    "TABLE_COLUMNS",
]

_CLAMP = 1e-15


@dataclass(frozen=True)
class GofReport:
    ks: float
    ad: float
    cvm: float
    p_ks: float
    p_ad: float
    p_cvm: float
    neg2_loglik: float = math.nan
    clamped: bool = False


def _u(u) -> np.ndarray:
    return np.sort(np.asarray(u, dtype=float))


def ks_statistic(u) -> float:
    """Two-sided KS distance from the fitted CDF values ``u = F(x)``."""
    u = _u(u)
    n = u.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def ad_statistic(u) -> float:
    u = _u(u)
    n = u.size
    i = np.arange(1, n + 1)
    return float(-n - np.sum((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))) / n)


def cvm_statistic(u) -> float:
    u = _u(u)
    n = u.size
    i = np.arange(1, n + 1)
    return float(1.0 / (12 * n) + math.fsum((u - (2 * i - 1) / (2 * n)) ** 2))


def ks_pvalue(ks: float, n: int) -> float:
    rn = math.sqrt(n)
    return float(kolmogorov_sf((rn + 0.12 + 0.11 / rn) * ks))


def _adinf(z: float) -> float:
    # Marsaglia and Marsaglia (2004) approximation to the limiting AD CDF.
    if z <= 0:
        return 0.0
    if z < 2.0:
        poly = 2.00012 + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z
        return math.exp(-1.2337141 / z) / math.sqrt(z) * poly
    poly = 1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z
    return math.exp(-math.exp(poly))


def ad_pvalue(ad: float) -> float:
    return float(min(1.0, max(0.0, 1.0 - _adinf(ad))))


def _cvm_inf(x: float, terms: int = 200) -> float:
    """Limiting CDF of the Cramer-von Mises statistic (Bessel series)."""
    if x <= 0:
        return 0.0
    j = np.arange(terms)
    y = (4 * j + 1) ** 2 / (16.0 * x)
    log_c = sc.gammaln(j + 0.5) - sc.gammaln(0.5) - sc.gammaln(j + 1.0)
    # exp(-y) K_{1/4}(y) = kve(y) exp(-2y)
    terms_ = np.exp(log_c - 2.0 * y) * np.sqrt(4 * j + 1) * sc.kve(0.25, y)
    return float(np.sum(terms_) / (math.pi * math.sqrt(x)))


def cvm_pvalue(cvm: float) -> float:
    return float(min(1.0, max(0.0, 1.0 - _cvm_inf(cvm))))


def gof_report(cdf: Callable[[np.ndarray], np.ndarray], data, neg2_loglik: float = math.nan) -> GofReport:
    """KS, AD and CvM statistics with asymptotic p-values.

    Fitted CDF values of exactly 0 or 1 leave AD undefined; they are clamped
    into ``[1e-15, 1 - 1e-15]`` and the report is flagged.
    """
    data = as_sample(data)
    u = np.asarray(cdf(data.sorted_values), dtype=float)
    if u.shape != (data.n,) or np.any(~np.isfinite(u)) or np.any((u < 0) | (u > 1)):
        raise ValueError("fitted CDF must return values in [0, 1] for every observation")
    clamped = bool(np.any((u < _CLAMP) | (u > 1 - _CLAMP)))
    u = np.clip(u, _CLAMP, 1 - _CLAMP)
    ks, ad, cvm = ks_statistic(u), ad_statistic(u), cvm_statistic(u)
    return GofReport(ks, ad, cvm, ks_pvalue(ks, data.n), ad_pvalue(ad), cvm_pvalue(cvm),
                     float(neg2_loglik), clamped)


TABLE_COLUMNS = ("model", "neg2_loglik", "ks", "ad", "cvm", "p_ks", "p_ad", "p_cvm", "params", "std_errors")


@dataclass
class ComparisonRow:
    """One model's line in a comparison table."""

    model: str
    report: GofReport
    params: Sequence[float]
    std_errors: Sequence[float] | None = field(default=None)

    def values(self) -> tuple:
        r = self.report
        ses = tuple(self.std_errors) if self.std_errors is not None else None
        return (self.model, r.neg2_loglik, r.ks, r.ad, r.cvm, r.p_ks, r.p_ad, r.p_cvm, tuple(self.params), ses)

    def as_dict(self) -> dict:
        return dict(zip(TABLE_COLUMNS, self.values()))
