"""Sample auto-covariance matrices and per-window preprocessing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateWindowError, InsufficientDataError, LayerMismatchError, SizeError
from .model import AutoCovMatrix, Layer, Provenance, SamplePath

__all__ = [
    "WindowConfig",
    "average_autocov",
    "detrend_linear",
    "normalize_window",
    "p_transform",
    "sample_autocov",
    "sample_autocov_array",
]


@dataclass(frozen=True)
class WindowConfig:
    """Risk horizon ``T``, sample size ``M`` and the step between windows."""

    T: int = 50
    M: int = 100
    stride: int | None = None

    def __post_init__(self):
        if self.stride is None:
            object.__setattr__(self, "stride", self.T + self.M)
        if self.T < 2 or self.M < 2 or self.stride < 1:
            raise SizeError(f"need T >= 2, M >= 2, stride >= 1; got {self}")

    @property
    def alpha(self) -> float:
        return self.T / self.M


def sample_autocov_array(values: np.ndarray, T: int, M: int) -> np.ndarray:
    """Raw ``(T, T)`` estimate from a 1-d array of fluctuations.

    Entry ``(t, t')`` (1-based) is ``sum_{mu=1..M} x[t+mu] x[t'+mu] / (M-1)``
    with 1-based series indices, so the first value of the series is never
    used and exactly ``T + M`` values are required. No mean is subtracted.
    """
    v = np.asarray(values, dtype=float)
    if T < 1 or M < 2:
        raise SizeError(f"need T >= 1 and M >= 2, got T={T}, M={M}")
    if len(v) < T + M:
        raise InsufficientDataError(
            f"need at least T + M = {T + M} values, got {len(v)}")
    # row mu holds x[1+mu : 1+mu+T] (0-based), mu = 0..M-1
    X = sliding_window_view(v[1:T + M], T)
    S = X.T @ X / (M - 1)
    return 0.5 * (S + S.T)


def sample_autocov(fluctuations: SamplePath, T: int, M: int) -> AutoCovMatrix:
    """Estimate the ``T x T`` auto-covariance from ``M`` shifted samples.

    The input must already be detrended; this is the plain product-sum
    estimator with an ``M - 1`` denominator.
    """
    S = sample_autocov_array(fluctuations.values, T, M)
    return AutoCovMatrix(S, fluctuations.layer, Provenance.SAMPLED, M)


def p_transform(incr: AutoCovMatrix) -> AutoCovMatrix:
    """Map an increment-level matrix to price level, ``P Sigma P'``.

    ``P`` is the lower-triangular matrix of ones, so the product is a double
    cumulative sum, computed in O(T^2).
    """
    if incr.layer is not Layer.INCREMENT:
        raise LayerMismatchError("p_transform expects an increment-level matrix")
    X = np.cumsum(np.cumsum(incr.entries, axis=0), axis=1)
    return incr.with_entries(0.5 * (X + X.T), layer=Layer.PRICE)


def average_autocov(mats: list[AutoCovMatrix]) -> AutoCovMatrix:
    """Entry-wise mean of same-layer matrices, tagged ``Averaged``."""
    if not mats:
        raise InsufficientDataError("nothing to average")
    layers = {m.layer for m in mats}
    if len(layers) != 1:
        raise LayerMismatchError("cannot average matrices from different layers")
    stack = np.stack([m.entries for m in mats])
    return AutoCovMatrix(stack.mean(axis=0), layers.pop(), Provenance.AVERAGED, mats[0].M)


def detrend_linear(path: SamplePath) -> tuple[SamplePath, float, float]:
    """Least-squares line fit; returns ``(residuals, slope, intercept)``.

    Time is the position in the window, ``t = 0, 1, ..., n-1``, so the
    intercept is the fitted value at the first observation.
    """
    y = path.values
    n = len(y)
    if n < 2:
        raise SizeError("detrending needs at least two points")
    t = np.arange(n, dtype=float)
    tc = t - t.mean()
    slope = float(tc @ (y - y.mean()) / (tc @ tc))
    intercept = float(y.mean() - slope * t.mean())
    resid = y - (intercept + slope * t)
    resid = resid - resid.mean()
    return SamplePath(resid, path.layer, path.spec, path.seed), slope, intercept


def normalize_window(incr: SamplePath) -> tuple[SamplePath, float]:
    """Scale increments to unit sample variance (``n - 1`` denominator).

    Returns the scaled path and the standard deviation that was divided out.
    """
    if incr.layer is not Layer.INCREMENT:
        raise LayerMismatchError("normalize_window expects increments")
    if len(incr) < 2:
        raise DegenerateWindowError("need at least two increments")
    scale = float(np.std(incr.values, ddof=1))
    # rounding leaves a tiny residual spread on constant input
    if not np.isfinite(scale) or scale <= 1e-12 * float(np.max(np.abs(incr.values))):
        raise DegenerateWindowError("window has zero variance")
    return SamplePath(incr.values / scale, incr.layer, incr.spec, incr.seed), scale
