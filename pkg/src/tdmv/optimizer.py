"""Mean-variance optimal trading strategies over a finite horizon.

A strategy ``pi`` holds position ``pi_t`` at step ``t = 1..T``. Its return
relative to the reference price ``x0`` is ``R = sum_t pi_t (x_t - x0)``, so
for normalized strategies (``sum pi = 1``) the expected return is
``mu_S = pi' mu - x0`` and the variance is ``pi' Sigma pi`` with ``Sigma`` the
price-level auto-covariance. Positive weights therefore profit from prices
rising above ``x0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve
from scipy.linalg.lapack import dpocon, dpotrf

from .errors import DegenerateConstraintError, IllConditionedError, LayerMismatchError, SizeError
from .model import AutoCovMatrix, Layer, Strategy

__all__ = [
    "RCOND_MIN",
    "DEGENERACY_TOL",
    "FrontierPoint",
    "RiskTriple",
    "Strategy",
    "constrained_strategy",
    "evaluate_risk",
    "expected_return",
    "frontier",
    "frontier_risk",
    "global_minimum_strategy",
    "linear_drift",
    "strategy_risk",
]

RCOND_MIN = 1e-12
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class FrontierPoint:
    target_return: float
    risk: float
    strategy: Strategy


@dataclass(frozen=True)
class RiskTriple:
    """Risk (standard deviation) of one strategy under three matrices.

    ``out_of_sample`` is ``None`` when no later window exists.
    """

    in_sample: float
    true_risk: float
    out_of_sample: float | None = None

    def to_dict(self) -> dict:
        return {"in_sample": self.in_sample, "true_risk": self.true_risk,
                "out_of_sample": self.out_of_sample}


def _entries(sigma) -> np.ndarray:
    if isinstance(sigma, AutoCovMatrix):
        if sigma.layer is not Layer.PRICE:
            raise LayerMismatchError(
                "optimization needs a price-level matrix; apply p_transform first")
        return sigma.entries
    S = np.asarray(sigma, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise SizeError(f"expected a square matrix, got shape {S.shape}")
    return S


class _Factor:
    """Cholesky factor with a LAPACK reciprocal-condition estimate."""

    def __init__(self, S: np.ndarray):
        S = np.ascontiguousarray(S, dtype=float)
        if not np.all(np.isfinite(S)):
            raise IllConditionedError("matrix has non-finite entries")
        c, info = dpotrf(S, lower=1, clean=1, overwrite_a=0)
        if info != 0:
            raise IllConditionedError(
                f"matrix is not positive definite (leading minor {info} fails)")
        anorm = np.abs(S).sum(axis=0).max()
        rcond, info = dpocon(c, anorm, uplo="L")
        if info != 0 or not rcond > RCOND_MIN:
            cond = float("inf") if rcond <= 0 else 1.0 / rcond
            raise IllConditionedError(
                f"condition estimate {cond:.3g} exceeds {1 / RCOND_MIN:.0e}", cond)
        self.S = S
        self.cho = (c, True)
        self.condition = 1.0 / rcond

    def solve(self, b: np.ndarray) -> np.ndarray:
        x = cho_solve(self.cho, b)
        # one step of iterative refinement
        return x + cho_solve(self.cho, b - self.S @ x)


def global_minimum_strategy(sigma) -> Strategy:
    """Minimum-variance normalized strategy, ``Sigma^{-1} 1 / (1' Sigma^{-1} 1)``.

    Raises
    ------
    IllConditionedError
        If ``sigma`` is not positive definite or its reciprocal condition
        estimate is below ``RCOND_MIN``.
    """
    S = _entries(sigma)
    u = _Factor(S).solve(np.ones(len(S)))
    a11 = u.sum()
    return Strategy(u / a11, lambda1=1.0 / a11, lambda2=0.0)


def _moments(f: _Factor, mu: np.ndarray):
    T = len(f.S)
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (T,):
        raise SizeError(f"drift vector has shape {mu.shape}, expected ({T},)")
    u = f.solve(np.ones(T))
    v = f.solve(mu)
    a11, a12, a22 = u.sum(), v.sum(), mu @ v
    det = a11 * a22 - a12 * a12
    if not det > DEGENERACY_TOL * abs(a11 * a22):
        raise DegenerateConstraintError(
            "drift is proportional to the all-ones vector; the return target "
            "cannot be imposed, use global_minimum_strategy instead")
    return u, v, a11, a12, a22, det


def constrained_strategy(sigma, mu, mu_S: float, x0: float = 0.0) -> Strategy:
    """Minimum-variance strategy with expected return ``mu_S``.

    Solves for ``(lambda1, lambda2)`` in ``pi = lambda1 Sigma^{-1} 1 +
    lambda2 Sigma^{-1} mu`` subject to ``pi' 1 = 1`` and
    ``pi' mu = x0 + mu_S``.
    """
    f = _Factor(_entries(sigma))
    u, v, a11, a12, a22, det = _moments(f, mu)
    m = x0 + mu_S
    lam1 = (a22 - a12 * m) / det
    lam2 = (a11 * m - a12) / det
    return Strategy(lam1 * u + lam2 * v, lam1, lam2, float(mu_S), float(x0))


def frontier_risk(sigma, mu, targets, x0: float = 0.0) -> np.ndarray:
    """Analytic minimal risk for each target return (no strategies built)."""
    f = _Factor(_entries(sigma))
    _, _, a11, a12, a22, det = _moments(f, mu)
    m = x0 + np.asarray(targets, dtype=float)
    var = (a11 * m * m - 2.0 * a12 * m + a22) / det
    return np.sqrt(np.maximum(var, 0.0))


def frontier(sigma, mu, x0: float, targets) -> list[FrontierPoint]:
    """One :class:`FrontierPoint` per target return, in the given order."""
    S = _entries(sigma)
    risks = frontier_risk(S, mu, targets, x0)
    return [FrontierPoint(float(t), float(r), constrained_strategy(S, mu, t, x0))
            for t, r in zip(targets, risks)]


def strategy_risk(weights, sigma) -> float:
    S = sigma.entries if isinstance(sigma, AutoCovMatrix) else np.asarray(sigma, float)
    w = np.asarray(weights.weights if isinstance(weights, Strategy) else weights, float)
    if S.shape != (len(w), len(w)):
        raise SizeError(f"strategy of length {len(w)} vs matrix {S.shape}")
    return float(np.sqrt(max(w @ S @ w, 0.0)))


def expected_return(weights, mu, x0: float = 0.0) -> float:
    w = np.asarray(weights.weights if isinstance(weights, Strategy) else weights, float)
    return float(w @ np.asarray(mu, float) - x0)


def linear_drift(T: int, slope: float, x0: float = 0.0) -> np.ndarray:
    """Expected prices ``mu_t = x0 + slope * t`` for ``t = 1..T``."""
    return x0 + slope * np.arange(1, T + 1, dtype=float)


def evaluate_risk(strategy: Strategy, in_sample, reference, out_sample=None) -> RiskTriple:
    """In-sample, true (reference) and out-of-sample risk of ``strategy``."""
    return RiskTriple(
        strategy_risk(strategy, in_sample),
        strategy_risk(strategy, reference),
        None if out_sample is None else strategy_risk(strategy, out_sample),
    )
