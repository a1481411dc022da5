"""Random variate generation for RBTC.

Three generators are provided: inverse transform through the Lambert W
quantile, acceptance-rejection with a Weibull proposal, and the exact
first/second upper-record mixture. The last one has no numerical error of
its own and serves as the reference for the other two.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import distribution as dist
from .distribution import RbtcParams

__all__ = [
    "RngStream",
    "ArProposal",
    "EnvelopeError",
    "UnboundedRatioError",
    "weibull_log_pdf",
    "log_ratio",
    "envelope_constant",
    "tune_proposal",
    "validate_proposal",
    "sample_ar",
    "sample_inverse",
    "sample_record_mixture",
    "SAMPLERS",
    "sample",
]

_U_OFFSET = 2.0**-54
_CHUNK = 1_000_000


@dataclass
class RngStream:
    """A counter-based (Philox) random stream identified by ``(seed, stream_id)``.

    ``key`` optionally namespaces the stream, e.g. by simulation cell. A
    stream is meant to have a single owner; two streams with the same
    identity produce the same sequence.
    """

    seed: int
    stream_id: int = 0
    key: tuple[int, ...] = ()
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        for v in (self.seed, self.stream_id, *self.key):
            if not 0 <= int(v) < 2**64:
                raise ValueError("seed, stream_id and key entries must be 64-bit unsigned integers")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(*map(int, self.key), int(self.stream_id)))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def uniform(self, n: int) -> np.ndarray:
        """Uniforms on the open interval (0, 1)."""
        return self.generator.random(n) + _U_OFFSET

    def exponential(self, n: int) -> np.ndarray:
        return -np.log(self.uniform(n))


class EnvelopeError(RuntimeError):
    """``f / (k g)`` exceeded 1 at a proposed point: ``k`` is too small."""


class UnboundedRatioError(ValueError):
    """``f / g`` is unbounded for the requested proposal."""


@dataclass(frozen=True)
class ArProposal:
    """Weibull proposal ``g(x) = theta * varpi * x**(varpi-1) * exp(-theta * x**varpi)`` and envelope ``k``."""

    theta: float
    varpi: float
    k: float

    def __post_init__(self):
        if not (self.theta > 0 and self.varpi > 0):
            raise ValueError("Weibull proposal parameters must be positive")
        if not self.k >= 1.0:
            raise ValueError(f"envelope constant must be >= 1, got {self.k}")


def weibull_log_pdf(theta: float, varpi: float, x):
    x = np.asarray(x, dtype=float)
    return math.log(theta) + math.log(varpi) + (varpi - 1.0) * np.log(x) - theta * x**varpi


def log_ratio(params: RbtcParams, theta: float, varpi: float, x):
    return np.asarray(dist.log_pdf(params, x)) - weibull_log_pdf(theta, varpi, x)


def _search_range(params: RbtcParams):
    return float(dist.quantile(params, 1e-12)), float(dist.isf(params, 1e-15))


def envelope_constant(params: RbtcParams, theta: float, varpi: float, grid_size: int = 2000) -> float:
    """``sup f/g``: log-spaced grid scan refined by golden-section search.

    Raises UnboundedRatioError when the ratio is still growing at an end of
    the support that it cannot be bounded at.
    """
    lo, hi = _search_range(params)
    lx = np.linspace(math.log(lo), math.log(hi), grid_size)
    lr = log_ratio(params, theta, varpi, np.exp(lx))
    j = int(np.argmax(lr))
    best = float(lr[j])
    if j == grid_size - 1:
        raise UnboundedRatioError("f/g still increasing at the right end; use a heavier-tailed proposal")
    if j == 0:
        if varpi > params.kappa * (1 + 1e-12):
            raise UnboundedRatioError("f/g unbounded near 0: proposal shape exceeds kappa")
        if abs(varpi - params.kappa) <= 1e-12 * params.kappa and params.p < 1.0:
            # Finite limit at x -> 0 when the shapes match.
            best = max(best, math.log(params.omega * (1.0 - params.p) / theta))
    else:
        res = optimize.minimize_scalar(lambda v: -float(log_ratio(params, theta, varpi, math.exp(v))),
                                       bracket=(lx[j - 1], lx[j], lx[j + 1]), method="golden",
                                       options={"xtol": 1e-10})
        best = max(best, -float(res.fun))
    return math.exp(best)


def validate_proposal(params: RbtcParams, proposal: ArProposal, grid_size: int = 100_000) -> float:
    """Check ``k`` against a brute-force grid maximum; returns that maximum."""
    lo, hi = _search_range(params)
    x = np.exp(np.linspace(math.log(lo), math.log(hi), grid_size))
    brute = float(np.exp(np.max(log_ratio(params, proposal.theta, proposal.varpi, x))))
    if proposal.k < brute * (1 - 1e-6):
        raise EnvelopeError(f"k={proposal.k:.8g} below grid maximum {brute:.8g}")
    return brute


def tune_proposal(params: RbtcParams) -> ArProposal:
    """Choose the Weibull proposal and its envelope constant.

    The shape is fixed at ``varpi = kappa`` (so ``f/g`` stays bounded at 0)
    and the rate ``theta`` is chosen, starting from ``theta = omega``, to
    minimise ``k``.
    """
    varpi = params.kappa

    def log_k(log_theta):
        return math.log(envelope_constant(params, math.exp(log_theta), varpi, grid_size=400))

    start = math.log(params.omega)
    res = optimize.minimize_scalar(log_k, bounds=(start - 6.0, start + 6.0), method="bounded",
                                   options={"xatol": 1e-3})
    theta = math.exp(res.x) if log_k(res.x) <= log_k(start) else params.omega
    k = envelope_constant(params, theta, varpi) * (1 + 1e-9)
    proposal = ArProposal(theta=theta, varpi=varpi, k=max(k, 1.0))
    validate_proposal(params, proposal)
    return proposal


def sample_ar(params: RbtcParams, proposal: ArProposal, rng: RngStream, n: int,
              *, return_proposals: bool = False):
    """Acceptance-rejection sampling with a Weibull proposal.

    Proposes ``Y = (E / theta)**(1/varpi)`` and accepts when
    ``U < f(Y) / (k g(Y))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    log_k = math.log(proposal.k)
    out = np.empty(n)
    filled = 0
    proposed = 0
    while filled < n:
        m = int(math.ceil((n - filled) * proposal.k * 1.1)) + 16
        y = (rng.exponential(m) / proposal.theta) ** (1.0 / proposal.varpi)
        u = rng.uniform(m)
        lr = log_ratio(params, proposal.theta, proposal.varpi, y) - log_k
        if np.any(lr > 1e-12):
            worst = int(np.argmax(lr))
            raise EnvelopeError(f"f/(k g) = {math.exp(lr[worst]):.6g} > 1 at x = {y[worst]:.6g}")
        accept = np.log(u) < lr
        # Accepted proposals are taken in order; `proposed` stops at the last one used.
        idx = np.flatnonzero(accept)
        need = n - filled
        if idx.size >= need:
            out[filled:] = y[idx[:need]]
            proposed += int(idx[need - 1]) + 1
            filled = n
        else:
            out[filled:filled + idx.size] = y[idx]
            proposed += m
            filled += idx.size
    return (out, proposed) if return_proposals else out


def sample_inverse(params: RbtcParams, rng: RngStream, n: int) -> np.ndarray:
    """Inverse-transform sampling through the closed-form quantile."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = np.empty(n)
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        out[start:stop] = dist.quantile(params, rng.uniform(stop - start))
    return out


def sample_record_mixture(params: RbtcParams, rng: RngStream, n: int) -> np.ndarray:
    """Exact draw as the first (prob. 1-p) or second (prob. p) upper Chen record.

    The k-th upper record of G has ``-log(1 - G(X)) ~ Gamma(k, 1)``, so the
    second record is ``G^{-1}(1 - exp(-(E1 + E2)))``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    e1 = rng.exponential(n)
    e2 = rng.exponential(n)
    second = rng.uniform(n) < params.p
    total = e1 + np.where(second, e2, 0.0)
    return np.log1p(total / params.omega) ** (1.0 / params.kappa)


SAMPLERS = ("ar", "inverse", "mixture")


def sample(params: RbtcParams, rng: RngStream, n: int, sampler: str = "mixture",
           proposal: ArProposal | None = None) -> np.ndarray:
    if sampler == "ar":
        return sample_ar(params, proposal or tune_proposal(params), rng, n)
    if sampler == "inverse":
        return sample_inverse(params, rng, n)
    if sampler == "mixture":
        return sample_record_mixture(params, rng, n)
    raise ValueError(f"unknown sampler {sampler!r}; valid names: {', '.join(SAMPLERS)}")
