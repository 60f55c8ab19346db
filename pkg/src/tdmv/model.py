"""Value types passed between modules.

All containers are frozen dataclasses; array payloads are copied on
construction and marked read-only so instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import LayerMismatchError, SizeError, ValidationError


class Kind(str, Enum):
    WHITE_NOISE = "WhiteNoise"
    AR1 = "AR1"


class Layer(str, Enum):
    PRICE = "PriceLevel"
    INCREMENT = "IncrementLevel"


class Provenance(str, Enum):
    TRUE = "True"
    SAMPLED = "Sampled"
    CLEANED = "Cleaned"
    AVERAGED = "Averaged"


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if arr.ndim != ndim:
        raise SizeError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProcessSpec:
    """Parametric description of a synthetic fluctuation process.

    ``AR1`` fluctuations follow ``d_t = a d_{t-1} + sqrt(1 - a^2) xi_t``,
    i.e. unit stationary variance, then scaled by ``sqrt(sigma2)``.
    ``layer`` says whether the process describes the price fluctuations
    themselves or the fluctuations of the price increments. The expected
    price is ``mu_t = drift_slope * t``.
    """

    kind: Kind = Kind.AR1
    a: float = 0.0
    sigma2: float = 1.0
    layer: Layer = Layer.PRICE
    drift_slope: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "layer", Layer(self.layer))
        if not abs(self.a) < 1:
            raise ValidationError(f"AR coefficient must satisfy |a| < 1, got {self.a}")
        if not self.sigma2 > 0:
            raise ValidationError(f"sigma2 must be positive, got {self.sigma2}")
        if self.kind is Kind.WHITE_NOISE and self.a != 0:
            raise ValidationError("white noise requires a = 0")

    @classmethod
    def white_noise(cls, sigma2: float = 1.0, layer: Layer = Layer.PRICE,
                    drift_slope: float = 0.0) -> ProcessSpec:
        return cls(Kind.WHITE_NOISE, 0.0, sigma2, layer, drift_slope)

    @classmethod
    def ar1(cls, a: float, sigma2: float = 1.0, layer: Layer = Layer.PRICE,
            drift_slope: float = 0.0) -> ProcessSpec:
        return cls(Kind.AR1, a, sigma2, layer, drift_slope)

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "a": self.a, "sigma2": self.sigma2,
                "layer": self.layer.value, "drift_slope": self.drift_slope}

    @classmethod
    def from_dict(cls, d: dict) -> ProcessSpec:
        return cls(Kind(d.get("kind", "AR1")), float(d.get("a", 0.0)),
                   float(d.get("sigma2", 1.0)), Layer(d.get("layer", "PriceLevel")),
                   float(d.get("drift_slope", 0.0)))


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    layer: Layer
    spec: ProcessSpec | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 1))
        object.__setattr__(self, "layer", Layer(self.layer))
        if len(self.values) < 1:
            raise SizeError("a sample path needs at least one value")
        if self.spec is not None and self.spec.layer is not self.layer:
            raise LayerMismatchError("path layer differs from its generating spec")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AutoCovMatrix:
    """A symmetric T x T auto-covariance matrix with its layer and origin.

    ``M`` is the number of shifted samples used per entry when the matrix
    was estimated; ``alpha = T / M`` then measures the sampling noise.
    """

    entries: np.ndarray
    layer: Layer
    provenance: Provenance = Provenance.TRUE
    M: int | None = None
    _sym_tol: float = field(default=1e-12, repr=False, compare=False)

    def __post_init__(self):
        e = _frozen(self.entries, 2)
        if e.shape[0] != e.shape[1] or e.shape[0] < 1:
            raise SizeError(f"auto-covariance matrix must be square, got {e.shape}")
        scale = max(1.0, float(np.max(np.abs(e)))) if e.size else 1.0
        if np.max(np.abs(e - e.T)) > self._sym_tol * scale:
            raise ValidationError("auto-covariance matrix is not symmetric")
        object.__setattr__(self, "entries", e)
        object.__setattr__(self, "layer", Layer(self.layer))
        object.__setattr__(self, "provenance", Provenance(self.provenance))
        if self.M is not None:
            object.__setattr__(self, "M", int(self.M))

    @property
    def T(self) -> int:
        return self.entries.shape[0]

    @property
    def alpha(self) -> float | None:
        return None if self.M is None else self.T / self.M

    def with_entries(self, entries, **changes) -> AutoCovMatrix:
        kw = {"layer": self.layer, "provenance": self.provenance, "M": self.M}
        kw.update(changes)
        return AutoCovMatrix(entries, **kw)


@dataclass(frozen=True)
class Strategy:
    """Trading positions ``pi_1..pi_T`` with the multipliers that produced them.

    ``weights = lambda1 * Sigma^{-1} 1 + lambda2 * Sigma^{-1} mu``. For a
    constrained solution ``target_return`` and ``x0`` record the imposed
    expected return and the reference price.
    """

    weights: np.ndarray
    lambda1: float = float("nan")
    lambda2: float = 0.0
    target_return: float | None = None
    x0: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights, 1))

    @property
    def T(self) -> int:
        return len(self.weights)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "lambda1": self.lambda1,
                "lambda2": self.lambda2, "target_return": self.target_return,
                "x0": self.x0}
