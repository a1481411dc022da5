"""Scalar special functions and numerically stable primitives.

Everything here is vectorised over numpy arrays and pure.
"""

from __future__ import annotations

import enum

import numpy as np

__all__ = ["DomainError", "WBranch", "lambert_w", "log1mexp", "kolmogorov_sf"]

_INV_E = np.exp(-1.0)
_LOG2 = np.log(2.0)


class DomainError(ValueError):
    """Raised when an argument lies outside a function's domain."""


class WBranch(enum.Enum):
    PRINCIPAL = "principal"
    MINUS_ONE = "minus_one"


def _branch_point_guess(z, sign):
    # Series in q = sqrt(2(1 + e z)) around the branch point.
    q = np.sqrt(np.maximum(2.0 * (1.0 + np.e * z), 0.0))
    q = sign * q
    return -1.0 + q - q**2 / 3.0 + 11.0 * q**3 / 72.0


def lambert_w(z, branch: WBranch = WBranch.PRINCIPAL, tol: float = 1e-14, maxiter: int = 50):
    """Real Lambert W function, the inverse of ``w -> w * exp(w)``.

    Parameters
    ----------
    z : float or array_like
        Argument. ``z >= -1/e`` on the principal branch and ``-1/e <= z < 0``
        on the ``MINUS_ONE`` branch.
    branch : WBranch
        ``PRINCIPAL`` returns ``w >= -1``; ``MINUS_ONE`` returns ``w <= -1``.

    Returns
    -------
    float or ndarray
        ``w`` with ``w * exp(w) == z`` to about machine precision.

    Notes
    -----
    Halley iteration started from the branch-point series near ``-1/e`` and
    from logarithmic asymptotics elsewhere.
    """
    branch = WBranch(branch)
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)

    # Points within rounding of -1/e are the branch point itself.
    near_bp = np.abs(z_arr + _INV_E) <= 4 * np.finfo(float).eps
    if np.any(np.isnan(z_arr)):
        raise DomainError("lambert_w argument is NaN")
    if np.any((z_arr < -_INV_E) & ~near_bp):
        raise DomainError(f"lambert_w argument below -1/e: min {z_arr.min()!r}")
    if branch is WBranch.MINUS_ONE and np.any(z_arr >= 0):
        raise DomainError("lambert_w MINUS_ONE branch requires z < 0")
    z_arr = np.where(near_bp, -_INV_E, z_arr)

    with np.errstate(all="ignore"):
        if branch is WBranch.MINUS_ONE:
            l1 = np.log(-z_arr)
            l2 = np.log(-l1)
            asym = l1 - l2 + l2 / l1
            w = np.where(z_arr < -0.25, _branch_point_guess(z_arr, -1.0), asym)
        else:
            lz = np.log1p(z_arr)
            big = np.log(z_arr) - np.log(np.log(z_arr))
            w = np.where(z_arr < -0.25, _branch_point_guess(z_arr, 1.0),
                         np.where(z_arr > 3.0, big, lz))

        active = ~near_bp & (z_arr != 0.0)
        w = np.where(z_arr == 0.0, 0.0, w)
        for _ in range(maxiter):
            if not active.any():
                break
            wa = w[active]
            za = z_arr[active]
            ew = np.exp(wa)
            f = wa * ew - za
            wp1 = wa + 1.0
            denom = ew * wp1 - (wa + 2.0) * f / (2.0 * wp1)
            step = np.where(denom != 0.0, f / denom, 0.0)
            wn = wa - step
            # Halley can step across -1 close to the branch point.
            if branch is WBranch.MINUS_ONE:
                wn = np.minimum(wn, -1.0)
            else:
                wn = np.maximum(wn, -1.0)
            w[active] = wn
            resid = np.abs(wn * np.exp(wn) - za)
            done = (resid <= tol * np.abs(za)) | (np.abs(step) <= tol * np.abs(wn)) | (step == 0.0)
            idx = np.flatnonzero(active)
            active[idx[done]] = False

        w = np.where(near_bp, -1.0, w)

    return float(w[0]) if scalar else w


def log1mexp(a):
    """``log(1 - exp(a))`` for ``a <= 0`` without cancellation.

    Switches between ``log(-expm1(a))`` and ``log1p(-exp(a))`` at
    ``a = -log 2``. Returns ``-inf`` at ``a = 0``.
    """
    a_arr = np.asarray(a, dtype=float)
    if np.any(a_arr > 0):
        raise DomainError("log1mexp requires a <= 0")
    with np.errstate(divide="ignore"):
        out = np.where(a_arr > -_LOG2, np.log(-np.expm1(a_arr)), np.log1p(-np.exp(a_arr)))
    return float(out) if out.ndim == 0 else out


def _kolmogorov_sf_scalar(lam: float) -> float:
    if lam <= 0.0:
        return 1.0
    if lam < 0.3:
        # Jacobi-transformed form; the alternating series converges too slowly here.
        total = 0.0
        c = np.pi**2 / (8.0 * lam * lam)
        for j in range(1, 200):
            term = np.exp(-((2 * j - 1) ** 2) * c)
            total += term
            if term < 1e-16:
                break
        return float(min(1.0, max(0.0, 1.0 - np.sqrt(2.0 * np.pi) / lam * total)))
    total = 0.0
    j = 1
    while True:
        term = np.exp(-2.0 * j * j * lam * lam)
        total += term if j % 2 else -term
        if term < 1e-12 or j > 100_000:
            break
        j += 1
    return float(min(1.0, max(0.0, 2.0 * total)))


def kolmogorov_sf(lam):
    """Survival function of the Kolmogorov distribution.

    ``2 * sum_{j>=1} (-1)^(j-1) exp(-2 j^2 lam^2)``, clamped to [0, 1].
    """
    lam_arr = np.asarray(lam, dtype=float)
    out = np.vectorize(_kolmogorov_sf_scalar, otypes=[float])(lam_arr)
    return float(out) if out.ndim == 0 else out
