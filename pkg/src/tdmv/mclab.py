"""Monte Carlo study of sampling noise in estimated auto-covariance matrices.

For each aspect ratio ``alpha = T / M`` we draw independent realizations of
length ``T + M``, estimate the auto-covariance, solve the optimization and
aggregate the strategies and their in-sample risks. The noise-free
reference (``alpha = 0``) uses the true matrix.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateConstraintError, IllConditionedError, ValidationError
from .estimation import detrend_linear, p_transform, sample_autocov_array
from .model import AutoCovMatrix, Layer, ProcessSpec, Provenance, SamplePath, Strategy
from .optimizer import (constrained_strategy, global_minimum_strategy, linear_drift,
                        strategy_risk)
from .procgen import ar1_filter, price_autocov
from .rng import make_rng, max_workers

__all__ = [
    "AlphaResult",
    "ExperimentConfig",
    "ExperimentReport",
    "StrategyStats",
    "aggregate_strategies",
    "run_alpha_sweep",
]

_CHUNK = 256


@dataclass(frozen=True)
class ExperimentConfig:
    spec: ProcessSpec
    T: int = 10
    alphas: tuple[float, ...] = (0.5, 0.1, 0.01)
    samples: int = 10_000
    targets: tuple[float, ...] = ()
    x0: float = 0.0
    seed: int = 0
    reestimate_drift: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "targets", tuple(float(t) for t in self.targets))
        if self.samples < 1:
            raise ValidationError("samples must be >= 1")
        if self.T < 3:
            raise ValidationError("T must be >= 3")
        for a in self.alphas:
            if not a > 0 or round(self.T / a) < 2:
                raise ValidationError(f"alpha={a} does not give an integer M >= 2")

    def M(self, alpha: float) -> int:
        return int(round(self.T / alpha))

    def to_dict(self) -> dict:
        return {"spec": self.spec.to_dict(), "T": self.T, "alphas": list(self.alphas),
                "samples": self.samples, "targets": list(self.targets), "x0": self.x0,
                "seed": self.seed, "reestimate_drift": self.reestimate_drift}

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {"spec", "T", "alphas", "samples", "targets", "x0", "seed", "reestimate_drift"}
        extra = set(d) - known
        if extra:
            raise ValidationError(f"unknown config fields: {sorted(extra)}")
        kw = dict(d)
        kw["spec"] = ProcessSpec.from_dict(d.get("spec", {}))
        return cls(**kw)


@dataclass(frozen=True)
class StrategyStats:
    """Across-sample summary of one optimization problem."""

    target: float | None
    mean: np.ndarray
    std: np.ndarray
    mean_in_sample_risk: float
    std_in_sample_risk: float
    mean_true_risk: float

    def to_dict(self) -> dict:
        return {"target": self.target, "mean": self.mean.tolist(), "std": self.std.tolist(),
                "mean_in_sample_risk": self.mean_in_sample_risk,
                "std_in_sample_risk": self.std_in_sample_risk,
                "mean_true_risk": self.mean_true_risk}


@dataclass(frozen=True)
class AlphaResult:
    alpha: float
    M: int | None
    samples: int
    failures: int
    global_minimum: StrategyStats | None
    targets: list[StrategyStats] = field(default_factory=list)

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.samples if self.samples else 0.0

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "M": self.M, "samples": self.samples,
                "failures": self.failures, "failure_fraction": self.failure_fraction,
                "global_minimum": None if self.global_minimum is None
                else self.global_minimum.to_dict(),
                "targets": [t.to_dict() for t in self.targets]}


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    true_row: AlphaResult
    rows: list[AlphaResult]
    wall_clock: float = 0.0

    @property
    def seed(self) -> int:
        return self.config.seed

    def row(self, alpha: float) -> AlphaResult:
        for r in self.rows:
            if r.alpha == alpha:
                return r
        raise KeyError(alpha)

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {"config": self.config.to_dict(), "true": self.true_row.to_dict(),
             "alphas": [r.to_dict() for r in self.rows]}
        if include_timing:
            d["wall_clock"] = self.wall_clock
        return d


def aggregate_strategies(strategies) -> tuple[np.ndarray, np.ndarray]:
    """Per-weight mean and sample standard deviation (``n - 1`` denominator).

    Accepts a list of :class:`Strategy` or a 2-d array with one strategy per
    row. A single strategy has zero standard deviation.
    """
    if isinstance(strategies, np.ndarray):
        W = np.asarray(strategies, float)
    else:
        if len(strategies) == 0:
            raise ValidationError("cannot aggregate an empty list of strategies")
        W = np.stack([s.weights if isinstance(s, Strategy) else np.asarray(s, float)
                      for s in strategies])
    if W.ndim != 2 or W.shape[0] == 0:
        raise ValidationError("cannot aggregate an empty list of strategies")
    mean = W.mean(axis=0)
    std = W.std(axis=0, ddof=1) if W.shape[0] > 1 else np.zeros(W.shape[1])
    return mean, std


def _fluctuations(spec: ProcessSpec, n: int, seed: int, ai: int, s: int) -> np.ndarray:
    xi = make_rng(seed, ai, s).standard_normal(n)
    return ar1_filter(xi, spec.a) * np.sqrt(spec.sigma2)


class _Problem:
    """Everything shared by the samples of one sweep."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.spec = cfg.spec
        self.T = cfg.T
        self.true_sigma = price_autocov(cfg.spec, cfg.T)
        self.mu = linear_drift(cfg.T, cfg.spec.drift_slope)

    def estimate(self, fluct: np.ndarray, M: int) -> tuple[np.ndarray, np.ndarray]:
        """Price-level estimate plus the drift vector used for targets."""
        T, spec = self.T, self.spec
        mu = self.mu
        if self.cfg.reestimate_drift:
            b = spec.drift_slope
            t = np.arange(1, len(fluct) + 1, dtype=float)
            if spec.layer is Layer.PRICE:
                resid, slope, _ = detrend_linear(SamplePath(b * t + fluct, Layer.PRICE))
                fluct = resid.values
            else:
                y = b + fluct
                slope = float(y.mean())
                fluct = y - slope
            mu = linear_drift(T, slope)
        S = sample_autocov_array(fluct, T, M)
        if spec.layer is Layer.INCREMENT:
            S = p_transform(AutoCovMatrix(S, Layer.INCREMENT, Provenance.SAMPLED, M)).entries
        return S, mu

    def solve(self, S: np.ndarray, mu: np.ndarray):
        """Weights and in-sample risks: row 0 global minimum, then targets."""
        strategies = [global_minimum_strategy(S)]
        for tgt in self.cfg.targets:
            strategies.append(constrained_strategy(S, mu, tgt, self.cfg.x0))
        W = np.stack([st.weights for st in strategies])
        risks = np.array([strategy_risk(w, S) for w in W])
        true_risks = np.array([strategy_risk(w, self.true_sigma) for w in W])
        return W, risks, true_risks

    def run_chunk(self, ai: int, M: int, idx: range):
        n_prob = 1 + len(self.cfg.targets)
        W = np.full((len(idx), n_prob, self.T), np.nan)
        R = np.full((len(idx), n_prob), np.nan)
        Rt = np.full((len(idx), n_prob), np.nan)
        for k, s in enumerate(idx):
            fluct = _fluctuations(self.spec, self.T + M, self.cfg.seed, ai, s)
            S, mu = self.estimate(fluct, M)
            try:
                W[k], R[k], Rt[k] = self.solve(S, mu)
            except (IllConditionedError, DegenerateConstraintError):
                pass
        return W, R, Rt


def _stats(target, W: np.ndarray, R: np.ndarray, Rt: np.ndarray) -> StrategyStats:
    mean, std = aggregate_strategies(W)
    sr = float(R.std(ddof=1)) if len(R) > 1 else 0.0
    return StrategyStats(target, mean, std, float(R.mean()), sr, float(Rt.mean()))


def _true_row(p: _Problem) -> AlphaResult:
    W, R, _ = p.solve(p.true_sigma.entries, p.mu)
    gms = StrategyStats(None, W[0], np.zeros(p.T), float(R[0]), 0.0, float(R[0]))
    tg = [StrategyStats(t, W[i + 1], np.zeros(p.T), float(R[i + 1]), 0.0, float(R[i + 1]))
          for i, t in enumerate(p.cfg.targets)]
    return AlphaResult(0.0, None, 0, 0, gms, tg)


def run_alpha_sweep(config: ExperimentConfig) -> ExperimentReport:
    """Run the Monte Carlo sweep over ``config.alphas``.

    Sample ``s`` at alpha index ``i`` uses the random stream
    ``(config.seed, i, s)``; chunks are evaluated on a thread pool but
    merged in sample order, so the report is identical for any number of
    threads. Samples whose matrix cannot be inverted (always the case for
    ``M <= T``) are tallied in ``failures`` and left out of the averages.
    """
    t0 = time.perf_counter()
    p = _Problem(config)
    rows = []
    with ThreadPoolExecutor(max_workers()) as ex:
        for ai, alpha in enumerate(config.alphas):
            M = config.M(alpha)
            chunks = [range(i, min(i + _CHUNK, config.samples))
                      for i in range(0, config.samples, _CHUNK)]
            parts = list(ex.map(lambda idx: p.run_chunk(ai, M, idx), chunks))
            W = np.concatenate([q[0] for q in parts])
            R = np.concatenate([q[1] for q in parts])
            Rt = np.concatenate([q[2] for q in parts])
            ok = ~np.isnan(R[:, 0])
            failures = int(np.count_nonzero(~ok))
            if ok.any():
                gms = _stats(None, W[ok, 0], R[ok, 0], Rt[ok, 0])
                tg = [_stats(t, W[ok, i + 1], R[ok, i + 1], Rt[ok, i + 1])
                      for i, t in enumerate(config.targets)]
            else:
                gms, tg = None, []
            rows.append(AlphaResult(alpha, M, config.samples, failures, gms, tg))
    return ExperimentReport(config, _true_row(p), rows, time.perf_counter() - t0)

