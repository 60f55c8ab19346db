"""Shrinkage cleaning of increment auto-covariances and log-eigenvalue spectra."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, LayerMismatchError, ValidationError
from .estimation import p_transform, sample_autocov_array
from .model import AutoCovMatrix, Layer, Provenance, SamplePath
from .rng import make_rng, max_workers

__all__ = [
    "ShrinkageConfig",
    "SpectrumHistogram",
    "auto_intensity",
    "auto_intensity_from_matrices",
    "clip",
    "eigen_spectrum",
    "log_spectrum_histogram",
    "null_model_spectrum",
    "shrink",
]

EIG_FLOOR = 1e-12


@dataclass(frozen=True)
class ShrinkageConfig:
    """Shrinkage intensity, either a number in [0, 1] or ``"auto"``.

    The target is always the diagonal matrix of the input variances.
    """

    delta: float | str = "auto"
    target: str = "DiagonalOfVariances"

    def __post_init__(self):
        if self.delta != "auto":
            d = float(self.delta)
            if not 0.0 <= d <= 1.0:
                raise ValidationError(f"shrinkage intensity must lie in [0, 1], got {d}")
            object.__setattr__(self, "delta", d)
        if self.target != "DiagonalOfVariances":
            raise ValidationError(f"unsupported shrinkage target {self.target!r}")

    @property
    def is_auto(self) -> bool:
        return self.delta == "auto"


def shrink(sigmaY: AutoCovMatrix, config: ShrinkageConfig | float) -> AutoCovMatrix:
    """Return ``delta * D + (1 - delta) * sigmaY`` with ``D = diag(sigmaY)``.

    ``config.delta`` must be numeric here; resolve ``"auto"`` with
    :func:`auto_intensity` first.
    """
    if not isinstance(config, ShrinkageConfig):
        config = ShrinkageConfig(config)
    if config.is_auto:
        raise ValidationError("resolve an 'auto' intensity before calling shrink")
    if sigmaY.layer is not Layer.INCREMENT:
        raise LayerMismatchError("shrinkage operates on increment-level matrices")
    d = config.delta
    S = sigmaY.entries
    out = (1.0 - d) * S
    np.fill_diagonal(out, np.diag(S))
    return sigmaY.with_entries(out, provenance=Provenance.CLEANED)


def auto_intensity_from_matrices(mats: Sequence[np.ndarray]) -> float:
    """Data-driven intensity from a stack of per-window estimates.

    With ``s_w`` the off-diagonal entries of window ``w``, the intensity
    minimizing the expected squared Frobenius distance between the shrunk
    estimate and the truth (target has zero off-diagonal) is
    ``sum var(s) / sum E[s^2]``. Both are estimated across windows: the
    numerator with the unbiased sample variance, the denominator with the
    mean of squares. The ratio is clipped to [0, 1].
    """
    stack = np.stack([np.asarray(m, float) for m in mats])
    if stack.shape[0] < 2:
        raise InsufficientDataError("auto intensity needs at least two windows")
    T = stack.shape[1]
    off = ~np.eye(T, dtype=bool)
    s = stack[:, off]
    noise = np.var(s, axis=0, ddof=1).sum()
    energy = np.mean(s * s, axis=0).sum()
    if energy <= 0.0:
        return 0.0
    return float(np.clip(noise / energy, 0.0, 1.0))


def auto_intensity(windows: Sequence[SamplePath], T: int) -> float:
    """Shrinkage intensity estimated from increment windows of length T + M."""
    if len(windows) < 2:
        raise InsufficientDataError("auto intensity needs at least two windows")
    mats = [sample_autocov_array(w.values, T, len(w) - T) for w in windows]
    return auto_intensity_from_matrices(mats)


def clip(*_args, **_kwargs):
    """Eigenvalue clipping is deliberately not provided.

    Normalized sample auto-covariance spectra of real returns show no
    eigenvalues separated from the bulk expected for independent increments,
    so there is no principled cut-off to clip at. Use :func:`shrink`.
    """
    raise NotImplementedError("clipping is not supported; use shrink()")


@dataclass(frozen=True)
class SpectrumHistogram:
    log_eigenvalues: np.ndarray
    bin_edges: np.ndarray
    densities: np.ndarray
    count_nonpositive: int
    count_total: int

    @property
    def count_positive(self) -> int:
        return len(self.log_eigenvalues)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def dynamic_range(self) -> float:
        """Largest over smallest retained eigenvalue."""
        if len(self.log_eigenvalues) == 0:
            return float("nan")
        return float(np.exp(self.log_eigenvalues[-1] - self.log_eigenvalues[0]))


def _retained_log_eigs(S: np.ndarray) -> tuple[np.ndarray, int]:
    ev = np.linalg.eigvalsh(S)
    floor = EIG_FLOOR * max(float(ev[-1]), 0.0)
    keep = ev > floor
    if not np.any(keep):
        return np.empty(0), len(ev)
    return np.log(ev[keep]), int(np.count_nonzero(~keep))


def log_spectrum_histogram(log_eigs: np.ndarray, count_nonpositive: int,
                           bins: int | str | None = None) -> SpectrumHistogram:
    """Histogram of log-eigenvalues scaled to mass ``retained / total``."""
    x = np.sort(np.asarray(log_eigs, float))
    total = len(x) + count_nonpositive
    if len(x) == 0:
        return SpectrumHistogram(x, np.array([0.0, 1.0]), np.zeros(1), count_nonpositive, total)
    edges = np.histogram_bin_edges(x, bins="fd" if bins is None else bins)
    dens, edges = np.histogram(x, bins=edges, density=True)
    dens = dens * (len(x) / total)
    return SpectrumHistogram(x, edges, dens, count_nonpositive, total)


def eigen_spectrum(sigma: AutoCovMatrix, bins: int | str | None = None) -> SpectrumHistogram:
    """Log-eigenvalue density of a symmetric matrix.

    Eigenvalues below ``1e-12`` times the largest one are counted in
    ``count_nonpositive`` and left out of the histogram.
    """
    logs, bad = _retained_log_eigs(sigma.entries)
    return log_spectrum_histogram(logs, bad, bins)


def _null_replica(T: int, M: int, seed: int, r: int) -> tuple[np.ndarray, int]:
    xi = make_rng(seed, r).standard_normal(T + M)
    S = AutoCovMatrix(sample_autocov_array(xi, T, M), Layer.INCREMENT, Provenance.SAMPLED, M)
    return _retained_log_eigs(p_transform(S).entries)


def null_model_spectrum(T: int, M: int, replicas: int, seed: int,
                        bins: int | str | None = None) -> SpectrumHistogram:
    """Pooled price-level spectrum for independent unit-variance increments.

    Replica ``r`` draws ``T + M`` i.i.d. N(0, 1) increments from the stream
    ``(seed, r)``, estimates the increment auto-covariance and maps it to
    price level. Results are pooled in replica order, so the histogram does
    not depend on the number of worker threads.
    """
    if replicas < 1:
        raise ValidationError("need at least one replica")
    with ThreadPoolExecutor(max_workers()) as ex:
        parts = list(ex.map(lambda r: _null_replica(T, M, seed, r), range(replicas)))
    logs = np.concatenate([p[0] for p in parts])
    bad = sum(p[1] for p in parts)
    return log_spectrum_histogram(logs, bad, bins)
