"""Multi-start Nelder-Mead and finite-difference observed information."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerOptions:
    """Settings shared by every point estimator.

    ``xatol`` bounds the simplex diameter and ``fatol`` the spread of objective
    values over the simplex; both must be met for a run to count as converged.
    """

    xatol: float = 1e-10
    fatol: float = 1e-10
    maxiter: int = 2000
    max_restarts: int = 8
    n_starts: int = 2
    initial_step: float = 0.5


@dataclass
class MultiStartResult:
    z: np.ndarray
    fun: float
    converged: bool
    iterations: int
    restarts_used: int


def _simplex(z0: np.ndarray, step: float) -> np.ndarray:
    sim = np.tile(z0, (z0.size + 1, 1))
    for j in range(z0.size):
        sim[j + 1, j] += step
    return sim


def _safe(fun):
    def wrapped(z):
        val = fun(z)
        return val if np.isfinite(val) else np.inf

    return wrapped


def minimize_multistart(
    fun: Callable[[np.ndarray], float],
    seeds: Sequence[np.ndarray],
    bounds: Sequence[tuple[float, float]],
    options: OptimizerOptions = OptimizerOptions(),
) -> MultiStartResult:
    """Minimise ``fun`` by Nelder-Mead from the most promising seeds.

    All seeds are scored first; full runs start from the ``options.n_starts``
    best ones. Each run is restarted from its own optimum with a fresh
    simplex until a restart no longer improves the objective, which guards
    against the simplex collapsing early. Further seeds are tried only while
    nothing has converged.
    """
    f = _safe(fun)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    cand = [np.clip(np.asarray(s, dtype=float), lo, hi) for s in seeds]
    scores = np.array([f(s) for s in cand])
    order = np.argsort(scores, kind="stable")

    best: MultiStartResult | None = None
    iterations = 0
    restarts = 0
    nm_opts = dict(xatol=options.xatol, fatol=options.fatol, maxiter=options.maxiter)
    for rank, idx in enumerate(order):
        if not np.isfinite(scores[idx]):
            break
        if rank >= options.n_starts and best is not None and best.converged:
            break
        if restarts > options.max_restarts:
            break
        z, step = cand[idx], options.initial_step
        prev = np.inf
        run_converged = False
        while True:
            res = optimize.minimize(f, z, method="Nelder-Mead", bounds=bounds,
                                    options=dict(nm_opts, initial_simplex=np.clip(_simplex(z, step), lo, hi)))
            iterations += int(res.nit)
            z, val = res.x, float(res.fun)
            run_converged = bool(res.success)
            if prev - val <= max(options.fatol, 1e-12 * abs(val)) or restarts >= options.max_restarts:
                break
            prev = val
            restarts += 1
            step = 0.1
        if best is None or val < best.fun or (run_converged and not best.converged and val <= best.fun + 1e-9):
            best = MultiStartResult(z=z, fun=val, converged=run_converged,
                                    iterations=iterations, restarts_used=restarts)
    if best is None:
        best = MultiStartResult(z=cand[order[0]], fun=float(scores[order[0]]), converged=False,
                                iterations=iterations, restarts_used=restarts)
    best.iterations = iterations
    best.restarts_used = restarts
    return best


class HessianError(ValueError):
    """The observed information matrix is not positive definite."""


def fd_hessian(fun: Callable[[np.ndarray], float], theta, rel_step: float = 1e-4) -> np.ndarray:
    """Central finite-difference Hessian with steps ``rel_step * max(1, |theta_j|)``."""
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    h = rel_step * np.maximum(1.0, np.abs(theta))
    f0 = fun(theta)
    hess = np.empty((k, k))
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        hess[i, i] = (fun(theta + ei) - 2.0 * f0 + fun(theta - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            val = (fun(theta + ei + ej) - fun(theta + ei - ej) - fun(theta - ei + ej) + fun(theta - ei - ej))
            hess[i, j] = hess[j, i] = val / (4.0 * h[i] * h[j])
    return hess


def standard_errors_from_hessian(hess: np.ndarray) -> np.ndarray:
    """Square roots of the diagonal of the inverse observed information."""
    eig = np.linalg.eigvalsh(hess)
    if eig.min() <= 0:
        raise HessianError(f"observed information not positive definite: eigenvalue {eig.min():.6g}")
    cov = np.linalg.inv(hess)
    return np.sqrt(np.diag(cov))
