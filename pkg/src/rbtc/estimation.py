"""Point estimation for RBTC: nine objectives, one optimiser, Wald standard errors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import distribution as dist
from .data import DataSample, as_sample
from .distribution import RbtcParams
from .optimize import (
    OptimizerOptions,
    fd_hessian,
    minimize_multistart,
    standard_errors_from_hessian,
)
from .special import DomainError

__all__ = [
    "EstimatorKind",
    "FitResult",
    "SpacingSet",
    "DataSample",
    "OptimizerOptions",
    "objective",
    "spacings",
    "fit",
    "standard_errors",
    "neg_log_likelihood",
    "params_from_z",
    "z_from_params",
]

SPACING_FLOOR = 1e-300

# Box in (log omega, log kappa, logit p) keeping every fit strictly interior.
Z_BOUNDS = ((-20.0, 20.0), (-10.0, 6.0), (-20.0, 20.0))


class EstimatorKind(enum.Enum):
    MLE = "mle"
    LSE = "lse"
    WLSE = "wlse"
    ADE = "ade"
    CVME = "cvme"
    MPSE = "mpse"
    RTADE = "rtade"
    MSADE = "msade"
    MSALDE = "msalde"

    @classmethod
    def parse(cls, name: "str | EstimatorKind") -> "EstimatorKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown estimator {name!r}; valid names: {valid}") from None


@dataclass(frozen=True)
class SpacingSet:
    """The ``n + 1`` spacings ``F(x_(i)) - F(x_(i-1))`` padded with 0 and 1."""

    d: np.ndarray

    @property
    def log_d(self) -> np.ndarray:
        return np.log(np.maximum(self.d, SPACING_FLOOR))


@dataclass
class FitResult:
    estimator: EstimatorKind
    params: RbtcParams
    objective_value: float
    neg2_loglik: float
    std_errors: tuple[float, float, float] | None
    converged: bool
    iterations: int
    restarts_used: int


def z_from_params(params: RbtcParams) -> np.ndarray:
    p = params.p
    return np.array([math.log(params.omega), math.log(params.kappa), math.log(p) - math.log1p(-p)])


def params_from_z(z) -> RbtcParams:
    p = 1.0 / (1.0 + math.exp(-z[2]))
    return RbtcParams(math.exp(z[0]), math.exp(z[1]), p)


def neg_log_likelihood(params: RbtcParams, data) -> float:
    data = as_sample(data)
    return float(-np.sum(dist.log_pdf(params, data.values)))


def spacings(params: RbtcParams, data) -> SpacingSet:
    """Spacings of the fitted CDF at the order statistics.

    Differences in the upper half are taken on the survival scale so that
    right-tail spacings keep their relative precision.
    """
    data = as_sample(data)
    x = data.sorted_values
    F = np.concatenate(([0.0], np.asarray(dist.cdf(params, x), dtype=float), [1.0]))
    S = np.concatenate(([1.0], np.asarray(dist.survival(params, x), dtype=float), [0.0]))
    d = np.where(F[:-1] > 0.5, S[:-1] - S[1:], F[1:] - F[:-1])
    return SpacingSet(np.maximum(d, 0.0))


def objective(kind, params: RbtcParams, data, *, msalde_literal: bool = False) -> float:
    """Estimator objective in minimisation form.

    Likelihood and product-of-spacings criteria are negated. Points where a
    logarithm has a nonpositive argument give ``+inf`` instead of raising.
    """
    kind = EstimatorKind.parse(kind)
    data = as_sample(data)
    n = data.n
    x = data.sorted_values
    i = np.arange(1, n + 1)
    with np.errstate(all="ignore"):
        if kind is EstimatorKind.MLE:
            val = neg_log_likelihood(params, data)
        elif kind is EstimatorKind.LSE:
            val = np.sum((dist.cdf(params, x) - i / (n + 1)) ** 2)
        elif kind is EstimatorKind.WLSE:
            w = (n + 1) ** 2 * (n + 2) / (i * (n - i + 1))
            val = np.sum(w * (dist.cdf(params, x) - i / (n + 1)) ** 2)
        elif kind is EstimatorKind.ADE:
            log_f = dist.log_cdf(params, x)
            log_s = dist.log_survival(params, x)
            # Standard pairing x_(i) with x_(n+1-i).
            val = -n - np.sum((2 * i - 1) * (log_f + log_s[::-1])) / n
        elif kind is EstimatorKind.CVME:
            val = 1.0 / (12 * n) + np.sum((dist.cdf(params, x) - (2 * i - 1) / (2 * n)) ** 2)
        elif kind is EstimatorKind.MPSE:
            val = -np.mean(spacings(params, data).log_d)
        elif kind is EstimatorKind.RTADE:
            F = dist.cdf(params, x)
            log_s = dist.log_survival(params, x)
            val = n / 2 - 2 * np.sum(F) - np.sum((2 * i - 1) * log_s[::-1]) / n
        elif kind is EstimatorKind.MSADE:
            val = np.sum(np.abs(spacings(params, data).d - 1.0 / (n + 1)))
        elif kind is EstimatorKind.MSALDE:
            sp = spacings(params, data)
            if msalde_literal:
                val = np.sum(np.abs(sp.d - math.log(1.0 / (n + 1))))
            else:
                val = np.sum(np.abs(sp.log_d - math.log(1.0 / (n + 1))))
        else:  # pragma: no cover
            raise AssertionError(kind)
    val = float(val)
    return val if math.isfinite(val) else math.inf


class _FastObjective:
    """Objective over ``z = (log omega, log kappa, logit p)`` for one sample.

    Evaluates with plain ``expm1`` while ``exp(x**kappa)`` stays finite and
    hands over to :func:`objective` otherwise.
    """

    def __init__(self, kind: EstimatorKind, data: DataSample, msalde_literal: bool):
        self.kind = kind
        self.data = data
        self.msalde_literal = msalde_literal
        self.x = data.sorted_values
        self.logx = np.log(self.x)
        self.sum_logx = float(np.sum(self.logx))
        n = self.n = data.n
        i = np.arange(1, n + 1)
        self.i_lse = i / (n + 1)
        self.w_wlse = (n + 1) ** 2 * (n + 2) / (i * (n - i + 1))
        self.i_cvm = (2 * i - 1) / (2 * n)
        self.two_i_m1 = 2 * i - 1

    def slow(self, z):
        try:
            return objective(self.kind, params_from_z(z), self.data, msalde_literal=self.msalde_literal)
        except (DomainError, OverflowError):
            return math.inf

    def __call__(self, z):
        z0, z1, z2 = float(z[0]), float(z[1]), float(z[2])
        if not (-700 < z0 < 700 and -700 < z1 < 700 and -700 < z2 < 700):
            return math.inf
        omega, kappa = math.exp(z0), math.exp(z1)
        p, q = 1.0 / (1.0 + math.exp(-z2)), 1.0 / (1.0 + math.exp(z2))
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            t = np.exp(kappa * self.logx)
            em1 = np.expm1(t)
            if not math.isfinite(em1[-1]) or omega * em1[-1] > 1e300:
                return self.slow(z)
            s = -omega * em1
            kind = self.kind
            if kind is EstimatorKind.MLE:
                ll = (self.n * (z0 + z1) + (kappa - 1.0) * self.sum_logx + np.sum(s) + np.sum(t)
                      + np.sum(np.log(q + p * omega * em1)))
                val = -ll
            else:
                log_s = s + np.log1p(p * omega * em1)
                F = -np.expm1(log_s)
                n = self.n
                if kind is EstimatorKind.LSE:
                    val = np.sum((F - self.i_lse) ** 2)
                elif kind is EstimatorKind.WLSE:
                    val = np.sum(self.w_wlse * (F - self.i_lse) ** 2)
                elif kind is EstimatorKind.CVME:
                    val = 1.0 / (12 * n) + np.sum((F - self.i_cvm) ** 2)
                elif kind is EstimatorKind.ADE:
                    log_f = np.where(log_s > -_LN2, np.log(F), np.log1p(-np.exp(log_s)))
                    val = -n - np.sum(self.two_i_m1 * (log_f + log_s[::-1])) / n
                elif kind is EstimatorKind.RTADE:
                    val = n / 2 - 2 * np.sum(F) - np.sum(self.two_i_m1 * log_s[::-1]) / n
                else:
                    Fp = np.concatenate(([0.0], F, [1.0]))
                    Sp = np.concatenate(([1.0], np.exp(log_s), [0.0]))
                    d = np.maximum(np.where(Fp[:-1] > 0.5, Sp[:-1] - Sp[1:], Fp[1:] - Fp[:-1]), 0.0)
                    if kind is EstimatorKind.MPSE:
                        val = -np.mean(np.log(np.maximum(d, SPACING_FLOOR)))
                    elif kind is EstimatorKind.MSADE:
                        val = np.sum(np.abs(d - 1.0 / (n + 1)))
                    elif self.msalde_literal:
                        val = np.sum(np.abs(d - math.log(1.0 / (n + 1))))
                    else:
                        val = np.sum(np.abs(np.log(np.maximum(d, SPACING_FLOOR)) + math.log(n + 1)))
        val = float(val)
        if not math.isfinite(val):
            return self.slow(z)
        return val


_LN2 = math.log(2.0)


def _probability_plot_seed(data: DataSample) -> tuple[float, float]:
    """Chen ``(omega, kappa)`` from a probability-plot regression over an omega grid."""
    x = data.sorted_values
    n = data.n
    u = np.arange(1, n + 1) / (n + 1)
    lx = np.log(x)
    best = (1.0, 1.0)
    best_sse = math.inf
    for omega in np.logspace(-3, 3, 61):
        y = np.log(np.log1p(-np.log1p(-u) / omega))
        # y = kappa * log x + c; a free intercept absorbs the scale mismatch.
        A = np.column_stack([lx, np.ones(n)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        kappa = coef[0]
        if kappa <= 0:
            continue
        sse = float(np.sum((y - kappa * lx) ** 2))
        if sse < best_sse:
            best_sse, best = sse, (float(omega), float(kappa))
    return best


def _seeds(obj: _FastObjective) -> list[np.ndarray]:
    omega0, kappa0 = _probability_plot_seed(obj.data)

    def obj2(z2):
        return obj(np.array([z2[0], z2[1], 0.0]))

    anchor = minimize_multistart(
        obj2, [np.log([omega0, kappa0])], Z_BOUNDS[:2],
        OptimizerOptions(xatol=1e-4, fatol=1e-6, maxiter=400, max_restarts=0, n_starts=1),
    ).z
    seeds = [np.array([anchor[0], anchor[1], 0.0])]
    for dw in (-math.log(2), math.log(2)):
        for dk in (-math.log(2), math.log(2)):
            for p in (0.25, 0.75):
                seeds.append(np.array([anchor[0] + dw, anchor[1] + dk, math.log(p / (1 - p))]))
    return seeds


def fit(kind, data, options: OptimizerOptions | None = None, *, msalde_literal: bool = False,
        with_se: bool = False) -> FitResult:
    """Fit RBTC to ``data`` with one of the nine estimators.

    The search runs over ``(log omega, log kappa, logit p)`` so every
    returned parameter triple is strictly feasible.
    """
    kind = EstimatorKind.parse(kind)
    data = as_sample(data)
    options = options or OptimizerOptions()
    if data.n < 4:
        raise ValueError("need at least 4 observations to fit three parameters")
    if np.ptp(data.values) == 0:
        raise ValueError("degenerate sample: all observations are equal")

    obj = _FastObjective(kind, data, msalde_literal)
    res = minimize_multistart(obj, _seeds(obj), Z_BOUNDS, options)
    params = params_from_z(res.z)
    ses = None
    if with_se:
        ses = standard_errors(data, params)
    return FitResult(
        estimator=kind,
        params=params,
        objective_value=res.fun,
        neg2_loglik=2.0 * neg_log_likelihood(params, data),
        std_errors=ses,
        converged=res.converged,
        iterations=res.iterations,
        restarts_used=res.restarts_used,
    )


def observed_information(data, mle: RbtcParams) -> np.ndarray:
    data = as_sample(data)

    def nll(theta):
        try:
            return neg_log_likelihood(RbtcParams(*theta), data)
        except DomainError:
            return math.inf

    return fd_hessian(nll, mle.as_tuple())


def standard_errors(data, mle: RbtcParams) -> tuple[float, float, float]:
    """Wald standard errors from the finite-difference observed information."""
    se = standard_errors_from_hessian(observed_information(data, mle))
    return (float(se[0]), float(se[1]), float(se[2]))
