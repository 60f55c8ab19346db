"""Synthetic price processes and their exact second-order structure.

Four cases are covered: white-noise or AR(1) fluctuations, applied either to
the price itself (``Layer.PRICE``) or to the price increments
(``Layer.INCREMENT``). For each we provide sample paths, the true
auto-covariance matrix, the closed-form inverse of the *price-level*
auto-covariance and the closed-form global-minimum-variance strategy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz
from scipy.signal import lfilter

from .errors import LayerMismatchError, SizeError
from .model import (AutoCovMatrix, Kind, Layer, ProcessSpec, Provenance, SamplePath,
                    Strategy)
from .rng import make_rng

__all__ = [
    "ClosedFormInverse",
    "ar1_filter",
    "closed_form_global_strategy",
    "cumulate",
    "price_autocov",
    "simulate",
    "true_autocov",
    "true_inverse",
]


def ar1_filter(xi: np.ndarray, a: float) -> np.ndarray:
    """Run the unit-variance AR(1) recursion over standard normal draws.

    The first value is taken as ``xi[..., 0]`` itself, i.e. drawn from the
    stationary N(0, 1) law, so every finite stretch is exactly stationary.
    Works along the last axis, so a batch of paths can be filtered at once.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.empty_like(xi)
    out[..., 0] = xi[..., 0]
    if xi.shape[-1] > 1:
        c = np.sqrt(1.0 - a * a)
        zi = (a * xi[..., :1])
        out[..., 1:], _ = lfilter([c], [1.0, -a], xi[..., 1:], axis=-1, zi=zi)
    return out


def simulate(spec: ProcessSpec, n: int, seed: int) -> SamplePath:
    """Draw ``n`` fluctuation values of ``spec`` (no drift added).

    White noise is generated by the same route as AR(1) with ``a = 0``, so
    the two are bitwise identical for a shared seed.
    """
    if n < 1:
        raise SizeError(f"n must be >= 1, got {n}")
    xi = make_rng(seed).standard_normal(n)
    values = ar1_filter(xi, spec.a) * np.sqrt(spec.sigma2)
    return SamplePath(values, spec.layer, spec, seed)


def cumulate(path: SamplePath, x0: float = 0.0, drift_slope: float = 0.0) -> SamplePath:
    """Turn increments into prices: ``x_t = x0 + b t + sum_{tau <= t} dy_tau``.

    Time runs ``t = 1..n`` over the ``n`` increments.
    """
    if path.layer is not Layer.INCREMENT:
        raise LayerMismatchError("cumulate expects an increment-level path")
    t = np.arange(1, len(path) + 1)
    values = x0 + drift_slope * t + np.cumsum(path.values)
    return SamplePath(values, Layer.PRICE, None, path.seed)


def _check_T(T: int, minimum: int = 1) -> None:
    if T < minimum:
        raise SizeError(f"T must be >= {minimum}, got {T}")


def true_autocov(spec: ProcessSpec, T: int) -> AutoCovMatrix:
    """Exact auto-covariance of the fluctuations described by ``spec``.

    The result lives on ``spec.layer``: for an increment process this is the
    increment matrix; pass it through :func:`tdmv.estimation.p_transform`
    (or call :func:`price_autocov`) to get the price-level matrix.
    """
    _check_T(T)
    if spec.kind is Kind.WHITE_NOISE:
        entries = spec.sigma2 * np.eye(T)
    else:
        entries = spec.sigma2 * toeplitz(spec.a ** np.arange(T))
    return AutoCovMatrix(entries, spec.layer, Provenance.TRUE)


def price_autocov(spec: ProcessSpec, T: int) -> AutoCovMatrix:
    """Exact price-level auto-covariance, whatever the layer of ``spec``."""
    from .estimation import p_transform

    sigma = true_autocov(spec, T)
    return p_transform(sigma) if spec.layer is Layer.INCREMENT else sigma


@dataclass(frozen=True)
class ClosedFormInverse:
    """Banded closed-form inverse of a price-level auto-covariance.

    ``A = 1 + a``, ``B = 1 + a A`` and ``C = 1 + A^2`` are the abbreviations
    used for the increment case.
    """

    a: float
    A: float
    B: float
    C: float
    matrix: np.ndarray


def _ar1_price_inverse(a: float, T: int) -> np.ndarray:
    diag = np.full(T, 1.0 + a * a)
    diag[0] = diag[-1] = 1.0
    inv = np.diag(diag) - a * (np.eye(T, k=1) + np.eye(T, k=-1))
    return inv / (1.0 - a * a)


def _ar1_increment_inverse(a: float, T: int) -> np.ndarray:
    # D' K D with D = P^{-1} the first-difference matrix and K the AR(1)
    # tridiagonal inverse. Row T-1 is the only place where -A replaces -A^2,
    # and the last diagonal entry is 1.
    A = 1.0 + a
    B = 1.0 + a * A
    C = 1.0 + A * A
    diag = np.full(T, 2.0 * B)
    diag[0] = C
    diag[T - 2] = C
    diag[T - 1] = 1.0
    off1 = np.full(T - 1, -A * A)
    off1[T - 2] = -A
    off2 = np.full(T - 2, a)
    inv = (np.diag(diag) + np.diag(off1, 1) + np.diag(off1, -1)
           + np.diag(off2, 2) + np.diag(off2, -2))
    return inv / (1.0 - a * a)


def true_inverse(spec: ProcessSpec, T: int) -> ClosedFormInverse:
    """Closed-form inverse of the price-level true auto-covariance (T >= 3).

    * price fluctuations: the AR(1) tridiagonal inverse (identity for white
      noise);
    * increment fluctuations: a pentadiagonal band, which for ``a = 0``
      reduces to ``(P P')^{-1}`` with diagonal ``(2, ..., 2, 1)`` and
      off-diagonal ``-1``.
    """
    _check_T(T, 3)
    a = float(spec.a)
    if spec.layer is Layer.PRICE:
        m = _ar1_price_inverse(a, T)
    else:
        m = _ar1_increment_inverse(a, T)
    m = m / spec.sigma2
    m.setflags(write=False)
    A = 1.0 + a
    return ClosedFormInverse(a, A, 1.0 + a * A, 1.0 + A * A, m)


def closed_form_global_strategy(spec: ProcessSpec, T: int) -> Strategy:
    """Analytic global-minimum-variance strategy for the four synthetic cases.

    ============================  ===================================
    price, white noise            ``(1/T, ..., 1/T)``
    price, AR(1)                  ``l (1, 1-a, ..., 1-a, 1)``,
                                  ``l = 1 / (2 + (T-2)(1-a))``
    increments, white noise       ``(1, 0, ..., 0)``
    increments, AR(1)             ``(1+a, -a, 0, ..., 0)``
    ============================  ===================================

    None of these depend on ``sigma2``.
    """
    _check_T(T, 3)
    a = float(spec.a)
    w = np.zeros(T)
    if spec.layer is Layer.PRICE:
        norm = 2.0 + (T - 2) * (1.0 - a)
        w[:] = (1.0 - a) / norm
        w[0] = w[-1] = 1.0 / norm
        # multiplier of Sigma^{-1} 1, i.e. 1 / (1' Sigma^{-1} 1)
        lam1 = spec.sigma2 * (1.0 + a) / norm
    else:
        w[0] = 1.0 + a
        w[1] = -a
        lam1 = spec.sigma2 * (1.0 - a * a)
    return Strategy(w, lambda1=lam1, lambda2=0.0)
