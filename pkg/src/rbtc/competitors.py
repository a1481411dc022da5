"""Rival lifetime models used for model comparison.

Parameter order follows the comparison tables, with the baseline shape first:

=====  ===========================================  ===========================
name   CDF                                          parameters
=====  ===========================================  ===========================
RBTC   record-transmuted Chen                       omega, kappa, p
C      Chen ``1 - exp(omega (1 - exp(x^kappa)))``    omega, kappa
W      Weibull ``1 - exp(-(x/eta)^beta)``            beta, eta
TW     quadratic transmutation of W                 beta, eta, lambda
GR     generalized Rayleigh ``(1 - exp(-(a x)^2))^b``  beta, alpha
TGR    quadratic transmutation of GR                beta, alpha, lambda
TRTW   record transmutation of ``1 - exp(-theta x^beta)``  beta, theta, p
TEE    quadratic transmutation of ``(1 - exp(-a x))^b``    beta, alpha, lambda
=====  ===========================================  ===========================

Quadratic transmutation is ``F = (1 + lambda) G - lambda G^2`` with
``lambda`` in [-1, 1]; record transmutation is
``F = G + p (1 - G) log(1 - G)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import distribution as dist
from .data import DataSample, as_sample
from .distribution import RbtcParams
from .optimize import (
    HessianError,
    OptimizerOptions,
    fd_hessian,
    minimize_multistart,
    standard_errors_from_hessian,
)
from .special import DomainError, log1mexp

__all__ = [
    "ModelSpec",
    "ModelFit",
    "MODELS",
    "MODEL_NAMES",
    "get_model",
    "model_cdf",
    "model_pdf",
    "model_log_pdf",
    "model_log_likelihood",
    "fit_model",
]

POSITIVE, UNIT, SIGNED_UNIT = "positive", "unit", "signed_unit"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    param_names: tuple[str, ...]
    domains: tuple[str, ...]
    log_sf: Callable  # (params, x) -> log(1 - F)
    log_pdf: Callable  # (params, x) -> log f

    @property
    def param_count(self) -> int:
        return len(self.param_names)

    @property
    def param_domains(self) -> tuple[str, ...]:
        return self.domains

    def check(self, params) -> tuple[float, ...]:
        params = tuple(float(v) for v in params)
        if len(params) != self.param_count:
            raise DomainError(f"{self.name} takes {self.param_count} parameters, got {len(params)}")
        for name, dom, v in zip(self.param_names, self.domains, params):
            ok = {POSITIVE: v > 0 and math.isfinite(v), UNIT: 0.0 <= v <= 1.0,
                  SIGNED_UNIT: -1.0 <= v <= 1.0}[dom]
            if not ok:
                raise DomainError(f"{self.name}: parameter {name}={v} outside its {dom} domain")
        return params


# Baselines return (log G, log(1 - G), log g).

def _weibull(beta, eta, x):
    h = (x / eta) ** beta
    log_g = math.log(beta / eta) + (beta - 1.0) * np.log(x / eta) - h
    return np.asarray(log1mexp(-h)), -h, log_g


def _weibull_rate(beta, theta, x):
    h = theta * x**beta
    log_g = math.log(theta * beta) + (beta - 1.0) * np.log(x) - h
    return np.asarray(log1mexp(-h)), -h, log_g


def _exponentiated(beta, inner_log_sf, inner_log_cdf, inner_log_pdf):
    # G = H^beta for a base H.
    log_G = beta * inner_log_cdf
    return log_G, np.asarray(log1mexp(np.minimum(log_G, 0.0))), math.log(beta) + (beta - 1.0) * inner_log_cdf + inner_log_pdf


def _gen_rayleigh(beta, alpha, x):
    u = (alpha * x) ** 2
    log_h = np.asarray(log1mexp(-u))
    return _exponentiated(beta, -u, log_h, math.log(2.0 * alpha * alpha) + np.log(x) - u)


def _exp_exponential(beta, alpha, x):
    u = alpha * x
    log_h = np.asarray(log1mexp(-u))
    return _exponentiated(beta, -u, log_h, math.log(alpha) - u)


def _quadratic(base):
    def log_sf(params, x):
        *bp, lam = params
        log_G, log_S, _ = base(*bp, x)
        # 1 - F = (1 - G)(1 - lambda G)
        return log_S + np.log1p(-lam * np.exp(log_G))

    def log_pdf(params, x):
        *bp, lam = params
        log_G, _, log_g = base(*bp, x)
        with np.errstate(divide="ignore"):
            return log_g + np.log(1.0 + lam - 2.0 * lam * np.exp(log_G))

    return log_sf, log_pdf


def _plain(base):
    def log_sf(params, x):
        return base(*params, x)[1]

    def log_pdf(params, x):
        return base(*params, x)[2]

    return log_sf, log_pdf


def _record(base):
    def log_sf(params, x):
        *bp, p = params
        _, log_S, _ = base(*bp, x)
        # 1 - F = (1 - G)(1 - p log(1 - G))
        return log_S + np.log1p(-p * log_S)

    def log_pdf(params, x):
        *bp, p = params
        _, log_S, log_g = base(*bp, x)
        return log_g + np.log1p(-p - p * log_S) if p < 1 else log_g + np.log(-log_S)

    return log_sf, log_pdf


def _rbtc_log_sf(params, x):
    return np.asarray(dist.log_survival(RbtcParams(*params), x))


def _rbtc_log_pdf(params, x):
    return np.asarray(dist.log_pdf(RbtcParams(*params), x))


def _chen_log_sf(params, x):
    return _rbtc_log_sf((*params, 0.0), x)


def _chen_log_pdf(params, x):
    return _rbtc_log_pdf((*params, 0.0), x)


def _spec(name, names, domains, pair):
    return ModelSpec(name, tuple(names), tuple(domains), pair[0], pair[1])


MODELS: dict[str, ModelSpec] = {
    "RBTC": _spec("RBTC", ("omega", "kappa", "p"), (POSITIVE, POSITIVE, UNIT), (_rbtc_log_sf, _rbtc_log_pdf)),
    "C": _spec("C", ("omega", "kappa"), (POSITIVE, POSITIVE), (_chen_log_sf, _chen_log_pdf)),
    "TW": _spec("TW", ("beta", "eta", "lambda"), (POSITIVE, POSITIVE, SIGNED_UNIT), _quadratic(_weibull)),
    "TGR": _spec("TGR", ("beta", "alpha", "lambda"), (POSITIVE, POSITIVE, SIGNED_UNIT), _quadratic(_gen_rayleigh)),
    "GR": _spec("GR", ("beta", "alpha"), (POSITIVE, POSITIVE), _plain(_gen_rayleigh)),
    "TRTW": _spec("TRTW", ("beta", "theta", "p"), (POSITIVE, POSITIVE, UNIT), _record(_weibull_rate)),
    "W": _spec("W", ("beta", "eta"), (POSITIVE, POSITIVE), _plain(_weibull)),
    "TEE": _spec("TEE", ("beta", "alpha", "lambda"), (POSITIVE, POSITIVE, SIGNED_UNIT), _quadratic(_exp_exponential)),
}
MODEL_NAMES = tuple(MODELS)


def get_model(name: "str | ModelSpec") -> ModelSpec:
    if isinstance(name, ModelSpec):
        return name
    key = str(name).upper()
    if key not in MODELS:
        raise ValueError(f"unknown model {name!r}; valid names: {', '.join(MODEL_NAMES)}")
    return MODELS[key]


def _x(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("x must be > 0")
    return arr


def _out(a):
    a = np.asarray(a, dtype=float)
    return float(a) if a.ndim == 0 else a


def model_cdf(spec, params, x):
    spec = get_model(spec)
    params = spec.check(params)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        return _out(np.clip(-np.expm1(spec.log_sf(params, _x(x))), 0.0, 1.0))


def model_log_pdf(spec, params, x):
    spec = get_model(spec)
    params = spec.check(params)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.asarray(spec.log_pdf(params, _x(x)), dtype=float)
    return _out(np.where(np.isnan(out), -np.inf, out))


def model_pdf(spec, params, x):
    return _out(np.exp(model_log_pdf(spec, params, x)))


def model_log_likelihood(spec, params, data) -> float:
    """Sum of log densities; ``-inf`` when any observation has zero density."""
    data = as_sample(data)
    return float(np.sum(model_log_pdf(spec, params, data.values)))


@dataclass
class ModelFit:
    model: str
    params: tuple[float, ...]
    neg2_loglik: float
    std_errors: tuple[float, ...] | None
    converged: bool


_TO_Z = {
    POSITIVE: (math.log, math.exp, (-20.0, 20.0)),
    UNIT: (lambda v: math.log(v) - math.log1p(-v), lambda z: 1.0 / (1.0 + math.exp(-z)), (-20.0, 20.0)),
    SIGNED_UNIT: (math.atanh, math.tanh, (-10.0, 10.0)),
}


def _weibull_plot(data: DataSample) -> tuple[float, float]:
    x = data.sorted_values
    u = np.arange(1, data.n + 1) / (data.n + 1)
    slope, icpt = np.polyfit(np.log(x), np.log(-np.log1p(-u)), 1)
    beta = max(float(slope), 0.05)
    return beta, float(math.exp(-icpt / beta))


def _seed_grid(spec: ModelSpec, data: DataSample) -> list[tuple[float, ...]]:
    beta, eta = _weibull_plot(data)
    med = float(np.median(data.values))
    name = spec.name
    if name in ("C", "RBTC"):
        from .estimation import _probability_plot_seed

        om, ka = _probability_plot_seed(data)
        base = [(om * a, ka * b) for a in (0.5, 1, 2) for b in (0.5, 1, 2)]
    elif name in ("W", "TW"):
        base = [(beta * a, eta * b) for a in (0.5, 1, 2) for b in (0.5, 1, 2)]
    elif name == "TRTW":
        base = [(beta * a, (eta * b) ** -(beta * a)) for a in (0.5, 1, 2) for b in (0.5, 1, 2)]
    elif name in ("GR", "TGR"):
        base = [(b, a / med) for b in (0.3, 1.0, 3.0) for a in (0.3, 1.0, 3.0)]
    else:  # EE baselines
        base = [(b, a * math.log(2.0) / med) for b in (0.3, 1.0, 3.0) for a in (0.3, 1.0, 3.0)]
    if spec.param_count == len(base[0]):
        return base
    extra = (-0.5, 0.0, 0.5) if spec.domains[-1] == SIGNED_UNIT else (0.25, 0.5, 0.75)
    return [(*b, e) for b in base for e in extra]


def fit_model(spec, data, options: OptimizerOptions | None = None, *, with_se: bool = True) -> ModelFit:
    """Maximum likelihood fit of any registered model."""
    spec = get_model(spec)
    data = as_sample(data)
    if spec.name == "RBTC":
        from .estimation import fit

        res = fit("mle", data, options)
        ses = None
        if with_se:
            try:
                from .estimation import standard_errors

                ses = standard_errors(data, res.params)
            except HessianError:
                ses = None
        return ModelFit("RBTC", res.params.as_tuple(), res.neg2_loglik, ses, res.converged)

    options = options or OptimizerOptions()
    fwd = [_TO_Z[d][0] for d in spec.domains]
    inv = [_TO_Z[d][1] for d in spec.domains]
    bounds = [_TO_Z[d][2] for d in spec.domains]

    def from_z(z):
        return tuple(f(v) for f, v in zip(inv, z))

    def nll(z):
        try:
            val = -model_log_likelihood(spec, from_z(z), data)
        except (DomainError, OverflowError):
            return math.inf
        return val if math.isfinite(val) else math.inf

    seeds = [np.array([f(v) for f, v in zip(fwd, s)]) for s in _seed_grid(spec, data)]
    res = minimize_multistart(nll, seeds, bounds, options)
    params = from_z(res.z)
    ses = None
    if with_se:

        def raw_nll(theta):
            try:
                return -model_log_likelihood(spec, theta, data)
            except DomainError:
                return math.inf

        try:
            se = standard_errors_from_hessian(fd_hessian(raw_nll, params))
            ses = tuple(float(v) for v in se) if np.all(np.isfinite(se)) else None
        except (HessianError, np.linalg.LinAlgError):
            ses = None
    return ModelFit(spec.name, params, 2.0 * res.fun, ses, res.converged)
