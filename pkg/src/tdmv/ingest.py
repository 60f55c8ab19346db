"""Empirical price data: CSV loading, rolling windows and the full pipeline.

Each window holds ``T + M`` consecutive increments of the (log-)price. Per
window the increments are demeaned (the increment-level image of a linear
price trend), scaled to unit variance, turned into a sample auto-covariance,
optionally shrunk towards its diagonal and mapped to price level. Strategies
are then evaluated in-sample, against the all-window average matrix and on
the next window.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import stats

from .cleaning import (ShrinkageConfig, SpectrumHistogram, auto_intensity_from_matrices,
                       log_spectrum_histogram, null_model_spectrum, shrink, _retained_log_eigs)
from .errors import (CsvFormatError, DegenerateConstraintError, DegenerateWindowError,
                     IllConditionedError, InsufficientDataError, ValidationError)
from .estimation import WindowConfig, average_autocov, normalize_window, p_transform, sample_autocov
from .model import AutoCovMatrix, Layer, SamplePath
from .optimizer import (RiskTriple, constrained_strategy, evaluate_risk, expected_return,
                        global_minimum_strategy, linear_drift, strategy_risk)
from .rng import max_workers

__all__ = [
    "Dataset",
    "PipelineReport",
    "PriceRecord",
    "Transform",
    "Window",
    "empirical_pipeline",
    "load_csv",
    "rolling_windows",
    "target_grid",
]

logger = logging.getLogger(__name__)

PRESET_TARGETS = (0.01, 0.06)


class Transform(str, Enum):
    RAW = "Raw"
    LOG = "Log"


@dataclass(frozen=True)
class PriceRecord:
    date: date
    close: float


@dataclass(frozen=True)
class Dataset:
    records: tuple[PriceRecord, ...]
    transform: Transform = Transform.LOG

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "transform", Transform(self.transform))
        for prev, cur in zip(self.records, self.records[1:]):
            if not cur.date > prev.date:
                raise ValidationError(f"dates not strictly increasing at {cur.date}")
        if any(not r.close > 0 for r in self.records):
            raise ValidationError("prices must be positive")

    def __len__(self) -> int:
        return len(self.records)

    @property
    def values(self) -> np.ndarray:
        """Prices after the transform (log prices by default)."""
        p = np.array([r.close for r in self.records], dtype=float)
        return np.log(p) if self.transform is Transform.LOG else p

    @property
    def dates(self) -> list[date]:
        return [r.date for r in self.records]

    @classmethod
    def from_prices(cls, prices, start: date = date(2000, 1, 1),
                    transform: Transform = Transform.LOG) -> Dataset:
        """Build a dataset with consecutive calendar dates."""
        return cls(tuple(PriceRecord(start + timedelta(days=i), float(p))
                         for i, p in enumerate(prices)), transform)


def _find_column(fieldnames, name: str) -> str:
    if name in fieldnames:
        return name
    lowered = {f.strip().lower(): f for f in fieldnames}
    if name.strip().lower() in lowered:
        return lowered[name.strip().lower()]
    raise CsvFormatError(f"missing column {name!r}; have {list(fieldnames)}")


def load_csv(path, date_column: str = "Date", price_column: str = "Adj Close",
             transform: Transform = Transform.LOG) -> Dataset:
    """Read a header-first CSV of ISO-8601 dates and positive prices.

    Rows are sorted by date. Row numbers in error messages count the header
    as row 1.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames:
            raise CsvFormatError("file has no header row")
        dcol = _find_column(reader.fieldnames, date_column)
        pcol = _find_column(reader.fieldnames, price_column)
        records = []
        seen = {}
        for rowno, row in enumerate(reader, start=2):
            if not any((v or "").strip() for v in row.values()):
                continue
            try:
                d = date.fromisoformat((row[dcol] or "").strip()[:10])
            except ValueError:
                raise CsvFormatError(f"unparseable date {row[dcol]!r}", rowno) from None
            try:
                p = float(row[pcol])
            except (TypeError, ValueError):
                raise CsvFormatError(f"unparseable price {row[pcol]!r}", rowno) from None
            if not (p > 0 and math.isfinite(p)):
                raise CsvFormatError(f"non-positive price {p}", rowno)
            if d in seen:
                raise CsvFormatError(f"duplicate date {d} (first seen in row {seen[d]})", rowno)
            seen[d] = rowno
            records.append(PriceRecord(d, p))
    records.sort(key=lambda r: r.date)
    return Dataset(tuple(records), transform)


@dataclass(frozen=True)
class Window:
    """``T + M`` increments starting at price index ``start``."""

    index: int
    start: int
    increments: np.ndarray
    start_date: date | None = None
    end_date: date | None = None


def rolling_windows(data: Dataset | np.ndarray, cfg: WindowConfig) -> list[Window]:
    """Slice consecutive windows of ``T + M`` increments, ``cfg.stride`` apart.

    A window needs ``T + M + 1`` prices. The out-of-sample partner of
    window ``w`` is window ``w + 1``.
    """
    if isinstance(data, Dataset):
        x, dates = data.values, data.dates
    else:
        x, dates = np.asarray(data, float), None
    L = cfg.T + cfg.M
    if len(x) < L + 1:
        raise InsufficientDataError(
            f"need at least T + M + 1 = {L + 1} prices, got {len(x)}")
    n = (len(x) - 1 - L) // cfg.stride + 1
    out = []
    for w in range(n):
        s = w * cfg.stride
        inc = np.diff(x[s:s + L + 1])
        inc.setflags(write=False)
        out.append(Window(w, s, inc, dates[s] if dates else None,
                          dates[s + L] if dates else None))
    return out


@dataclass
class WindowResult:
    index: int
    start_date: date | None
    end_date: date | None
    status: str = "ok"
    reason: str | None = None
    scale: float = float("nan")
    drift: float = float("nan")
    gms_weights: np.ndarray | None = None
    gms_risk: RiskTriple | None = None
    target_weights: list[np.ndarray] = field(default_factory=list)
    target_risks: list[RiskTriple] = field(default_factory=list)

    @property
    def roughness(self) -> float:
        """Sum of squared successive differences of the global-minimum weights."""
        return float(np.sum(np.diff(self.gms_weights) ** 2))

    def to_dict(self) -> dict:
        d = {"index": self.index,
             "start_date": self.start_date.isoformat() if self.start_date else None,
             "end_date": self.end_date.isoformat() if self.end_date else None,
             "status": self.status, "reason": self.reason}
        if self.status == "ok":
            d.update({"scale": self.scale, "drift": self.drift,
                      "gms_weights": self.gms_weights.tolist(),
                      "gms_risk": self.gms_risk.to_dict(),
                      "roughness": self.roughness,
                      "target_risks": [r.to_dict() for r in self.target_risks]})
        return d


@dataclass
class PipelineReport:
    config: WindowConfig
    delta: float | None
    targets: np.ndarray
    windows: list[WindowResult]
    spectrum: SpectrumHistogram
    null_spectrum: SpectrumHistogram | None
    ks_distance: float | None

    @property
    def ok(self) -> list[WindowResult]:
        return [w for w in self.windows if w.status == "ok"]

    @property
    def processed(self) -> int:
        return len(self.ok)

    @property
    def skipped(self) -> int:
        return len(self.windows) - self.processed

    def gms_risks(self) -> np.ndarray:
        """``(n_ok, 3)`` array of in-sample, true, out-of-sample (NaN if none)."""
        return np.array([[w.gms_risk.in_sample, w.gms_risk.true_risk,
                          np.nan if w.gms_risk.out_of_sample is None
                          else w.gms_risk.out_of_sample] for w in self.ok])

    def gms_mean_std(self) -> tuple[np.ndarray, np.ndarray]:
        W = np.stack([w.gms_weights for w in self.ok])
        return W.mean(axis=0), W.std(axis=0, ddof=1) if len(W) > 1 else np.zeros(W.shape[1])

    def frontier_table(self) -> list[dict]:
        rows = []
        for k, t in enumerate(self.targets):
            r = np.array([[w.target_risks[k].in_sample, w.target_risks[k].true_risk,
                           np.nan if w.target_risks[k].out_of_sample is None
                           else w.target_risks[k].out_of_sample] for w in self.ok])
            if len(r) == 0:
                continue
            oos = r[:, 2][~np.isnan(r[:, 2])]
            rows.append({"target": float(t), "in_sample": float(r[:, 0].mean()),
                         "true_risk": float(r[:, 1].mean()),
                         "out_of_sample": float(oos.mean()) if len(oos) else None})
        return rows

    def to_dict(self) -> dict:
        g = self.gms_risks()
        mean, std = self.gms_mean_std() if self.processed else (np.array([]), np.array([]))
        oos = g[:, 2][~np.isnan(g[:, 2])] if len(g) else np.array([])
        return {
            "config": {"T": self.config.T, "M": self.config.M, "stride": self.config.stride},
            "delta": self.delta,
            "windows_total": len(self.windows),
            "windows_processed": self.processed,
            "windows_skipped": self.skipped,
            "global_minimum": {
                "mean": mean.tolist(), "std": std.tolist(),
                "mean_in_sample": float(g[:, 0].mean()) if len(g) else None,
                "mean_true_risk": float(g[:, 1].mean()) if len(g) else None,
                "mean_out_of_sample": float(oos.mean()) if len(oos) else None,
            },
            "frontier": self.frontier_table(),
            "ks_distance": self.ks_distance,
            "spectrum": {"bin_centers": self.spectrum.bin_centers.tolist(),
                         "densities": self.spectrum.densities.tolist(),
                         "count_nonpositive": self.spectrum.count_nonpositive},
            "null_spectrum": None if self.null_spectrum is None else {
                "bin_centers": self.null_spectrum.bin_centers.tolist(),
                "densities": self.null_spectrum.densities.tolist()},
            "windows": [w.to_dict() for w in self.windows],
        }


def _prepare(win: Window, T: int, M: int):
    """Demean, normalize and estimate one window; raises on degeneracy."""
    inc = SamplePath(win.increments, Layer.INCREMENT)
    drift = float(np.mean(inc.values))
    z, scale = normalize_window(SamplePath(inc.values - drift, Layer.INCREMENT))
    return sample_autocov(z, T, M), scale, drift


def target_grid(sigma: AutoCovMatrix, slope: float, n: int = 40,
                presets=PRESET_TARGETS) -> np.ndarray:
    """Targets from the global-minimum return up to that return plus 4x its risk."""
    mu = linear_drift(sigma.T, slope)
    g = global_minimum_strategy(sigma)
    r0, s0 = expected_return(g, mu), strategy_risk(g, sigma)
    grid = np.linspace(r0, r0 + 4.0 * s0, n)
    return np.unique(np.concatenate([grid, np.asarray(presets, float)]))


def empirical_pipeline(data: Dataset | np.ndarray, cfg: WindowConfig,
                       cleaning: ShrinkageConfig | None = None, targets=None,
                       null_replicas: int = 200, seed: int = 0) -> PipelineReport:
    """Run estimate -> (clean) -> optimize -> risk evaluation over all windows.

    ``targets`` are expected strategy returns in the units of the normalized
    window (unit-variance increments); by default a 40-point grid from
    :func:`target_grid` on the all-window average matrix plus the presets
    0.01 and 0.06. With ``cleaning.delta == "auto"`` a single intensity is
    estimated from all windows. ``null_replicas = 0`` skips the null-model
    spectrum and the KS distance.
    """
    T, M = cfg.T, cfg.M
    windows = rolling_windows(data, cfg)
    results = [WindowResult(w.index, w.start_date, w.end_date) for w in windows]

    def prep(w):
        try:
            return _prepare(w, T, M)
        except DegenerateWindowError as e:
            return e

    with ThreadPoolExecutor(max_workers()) as ex:
        prepared = list(ex.map(prep, windows))
    sigY: list[AutoCovMatrix | None] = []
    for res, p in zip(results, prepared):
        if isinstance(p, Exception):
            res.status, res.reason = "skipped", f"degenerate window: {p}"
            logger.info("window %d skipped: %s", res.index, res.reason)
            sigY.append(None)
        else:
            sigY.append(p[0])
            res.scale, res.drift = p[1], p[2]
    valid = [s for s in sigY if s is not None]
    if not valid:
        raise InsufficientDataError("every window was degenerate")

    raw_X = [None if s is None else p_transform(s) for s in sigY]
    reference = p_transform(average_autocov(valid))
    mean_slope = float(np.mean([r.drift / r.scale for r in results if r.status == "ok"]))

    delta = None
    if cleaning is not None:
        if cleaning.is_auto:
            delta = auto_intensity_from_matrices([s.entries for s in valid]) \
                if len(valid) >= 2 else 0.0
        else:
            delta = float(cleaning.delta)

    if targets is None:
        try:
            targets = target_grid(reference, mean_slope)
        except (IllConditionedError, DegenerateConstraintError):
            targets = np.asarray(PRESET_TARGETS, float)
    targets = np.asarray(targets, dtype=float)

    def solve(i):
        res = results[i]
        if res.status != "ok":
            return None
        S = sigY[i] if delta is None else shrink(sigY[i], delta)
        SX = p_transform(S)
        nxt = raw_X[i + 1] if i + 1 < len(raw_X) else None
        mu = linear_drift(T, res.drift / res.scale)
        try:
            g = global_minimum_strategy(SX)
            tw, tr = [], []
            for t in targets:
                st = constrained_strategy(SX, mu, t, 0.0)
                tw.append(np.array(st.weights))
                tr.append(evaluate_risk(st, SX, reference, nxt))
        except (IllConditionedError, DegenerateConstraintError) as e:
            return e
        return np.array(g.weights), evaluate_risk(g, SX, reference, nxt), tw, tr

    with ThreadPoolExecutor(max_workers()) as ex:
        solved = list(ex.map(solve, range(len(results))))
    for res, out in zip(results, solved):
        if out is None:
            continue
        if isinstance(out, Exception):
            res.status, res.reason = "skipped", f"{type(out).__name__}: {out}"
            logger.info("window %d skipped: %s", res.index, res.reason)
            continue
        res.gms_weights, res.gms_risk, res.target_weights, res.target_risks = out

    logs, bad = [], 0
    for X in raw_X:
        if X is not None:
            lg, b = _retained_log_eigs(X.entries)
            logs.append(lg)
            bad += b
    pooled = np.concatenate(logs)
    spectrum = log_spectrum_histogram(pooled, bad)
    null, ks = None, None
    if null_replicas > 0:
        null = null_model_spectrum(T, M, null_replicas, seed)
        ks = float(stats.ks_2samp(pooled, null.log_eigenvalues).statistic)
    return PipelineReport(cfg, delta, targets, results, spectrum, null, ks)
