from datetime import date

import numpy as np
import pytest

from tdmv.cleaning import ShrinkageConfig
from tdmv.errors import CsvFormatError, InsufficientDataError, ValidationError
from tdmv.estimation import WindowConfig
from tdmv.ingest import (Dataset, PriceRecord, Transform, empirical_pipeline, load_csv,
                         rolling_windows, target_grid)
from tdmv.model import AutoCovMatrix, Layer
from tdmv.rng import make_rng


def write(tmp_path, text, name="p.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def iid_prices(n, seed=0, vol=0.01):
    inc = vol * make_rng(seed).standard_normal(n - 1)
    return np.exp(np.log(100.0) + np.concatenate([[0.0], np.cumsum(inc)]))


class TestLoadCsv:
    def test_basic_and_sorted(self, tmp_path):
        p = write(tmp_path, "Date,Open,Adj Close\n2020-01-03,1,3.0\n2020-01-02,1,2.0\n")
        d = load_csv(p)
        assert d.dates == [date(2020, 1, 2), date(2020, 1, 3)]
        np.testing.assert_allclose(d.values, np.log([2.0, 3.0]))

    def test_case_insensitive_and_raw(self, tmp_path):
        p = write(tmp_path, "date,adj close\n2020-01-02,2.5\n")
        d = load_csv(p, transform=Transform.RAW)
        assert d.values.tolist() == [2.5]

    def test_custom_column(self, tmp_path):
        p = write(tmp_path, "Day,Close\n2020-01-02,4\n")
        assert load_csv(p, "Day", "Close", Transform.RAW).values.tolist() == [4.0]

    def test_missing_column(self, tmp_path):
        with pytest.raises(CsvFormatError, match="Adj Close"):
            load_csv(write(tmp_path, "Date,Close\n2020-01-02,1\n"))

    @pytest.mark.parametrize("body,row", [
        ("2020-01-02,1\n2020-01-03,-1\n", 3),
        ("2020-01-02,1\n2020-01-03,abc\n", 3),
        ("20-1-2,1\n", 2),
        ("2020-01-02,1\n2020-01-03,0\n", 3),
    ])
    def test_bad_rows(self, tmp_path, body, row):
        with pytest.raises(CsvFormatError) as err:
            load_csv(write(tmp_path, "Date,Adj Close\n" + body))
        assert err.value.row == row
        assert str(err.value).startswith(f"row {row}:")

    def test_duplicate_date(self, tmp_path):
        with pytest.raises(CsvFormatError) as err:
            load_csv(write(tmp_path, "Date,Adj Close\n2020-01-02,1\n2020-01-02,2\n"))
        assert err.value.row == 3

    def test_empty_file(self, tmp_path):
        with pytest.raises(CsvFormatError):
            load_csv(write(tmp_path, ""))

    def test_dataset_validation(self):
        with pytest.raises(ValidationError):
            Dataset((PriceRecord(date(2020, 1, 2), 1.0), PriceRecord(date(2020, 1, 1), 1.0)))
        with pytest.raises(ValidationError):
            Dataset((PriceRecord(date(2020, 1, 2), 0.0),))


class TestWindows:
    def test_exactly_one(self):
        ws = rolling_windows(np.arange(151.0), WindowConfig(50, 100))
        assert len(ws) == 1 and len(ws[0].increments) == 150
        assert np.all(ws[0].increments == 1.0)

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            rolling_windows(np.arange(150.0), WindowConfig(50, 100))

    @pytest.mark.parametrize("n,stride,expected", [(301, None, 2), (300, None, 1),
                                                   (451, None, 3), (161, 5, 3)])
    def test_counts(self, n, stride, expected):
        ws = rolling_windows(np.arange(float(n)), WindowConfig(50, 100, stride))
        assert len(ws) == expected
        step = 150 if stride is None else stride
        assert [w.start for w in ws] == [k * step for k in range(expected)]

    def test_disjoint_windows_share_boundary_price_only(self):
        x = np.cumsum(make_rng(1).standard_normal(301))
        a, b = rolling_windows(x, WindowConfig(50, 100))
        assert a.increments[-1] == x[150] - x[149]
        assert b.increments[0] == x[151] - x[150]

    def test_dates(self):
        d = Dataset.from_prices(np.ones(151) + np.arange(151), start=date(2021, 1, 1))
        (w,) = rolling_windows(d, WindowConfig(50, 100))
        assert w.start_date == date(2021, 1, 1) and w.end_date == date(2021, 5, 31)


class TestPipeline:
    def test_iid_increments(self):
        cfg = WindowConfig(10, 400)
        prices = iid_prices(20 * 410 + 1, seed=2)
        rep = empirical_pipeline(Dataset.from_prices(prices), cfg, null_replicas=0)
        assert rep.processed == 20 and rep.skipped == 0
        mean, _ = rep.gms_mean_std()
        expected = np.zeros(10)
        expected[0] = 1.0
        assert np.max(np.abs(mean - expected)) < 0.1
        assert rep.ks_distance is None and rep.delta is None
        g = rep.gms_risks()
        assert np.isnan(g[-1, 2]) and np.all(np.isfinite(g[:-1]))

    def test_zero_intensity_equals_uncleaned(self):
        cfg = WindowConfig(8, 40)
        d = Dataset.from_prices(iid_prices(6 * 48 + 1, seed=3))
        a = empirical_pipeline(d, cfg, None, null_replicas=0)
        b = empirical_pipeline(d, cfg, ShrinkageConfig(0.0), null_replicas=0)
        np.testing.assert_array_equal(a.gms_risks(), b.gms_risks())
        assert b.delta == 0.0

    def test_full_shrinkage_is_smoother(self):
        cfg = WindowConfig(10, 20)
        d = Dataset.from_prices(iid_prices(10 * 30 + 1, seed=4))
        a = empirical_pipeline(d, cfg, None, null_replicas=0)
        b = empirical_pipeline(d, cfg, ShrinkageConfig(1.0), null_replicas=0)
        ra = np.mean([w.roughness for w in a.ok])
        rb = np.mean([w.roughness for w in b.ok])
        assert rb < ra
        # with a diagonal increment matrix only the first two weights are nonzero
        for w in b.ok:
            assert np.max(np.abs(w.gms_weights[2:-1])) < 1e-8

    def test_degenerate_windows_skipped(self):
        cfg = WindowConfig(5, 20)
        prices = iid_prices(3 * 25 + 1, seed=5)
        prices[25:51] = prices[25]  # second window is flat
        rep = empirical_pipeline(Dataset.from_prices(prices), cfg, null_replicas=0)
        assert rep.processed == 2 and rep.skipped == 1
        assert rep.processed + rep.skipped == 3
        assert rep.windows[1].status == "skipped"
        assert "degenerate" in rep.windows[1].reason
        # window 0's partner is skipped, so no out-of-sample risk
        assert rep.windows[0].gms_risk.out_of_sample is None

    def test_all_degenerate(self):
        with pytest.raises(InsufficientDataError):
            empirical_pipeline(np.zeros(100), WindowConfig(5, 20), null_replicas=0)

    def test_deterministic_with_null(self, monkeypatch):
        cfg = WindowConfig(10, 20)
        d = Dataset.from_prices(iid_prices(5 * 30 + 1, seed=6))
        monkeypatch.setenv("TDMV_THREADS", "1")
        a = empirical_pipeline(d, cfg, ShrinkageConfig("auto"), null_replicas=10, seed=2)
        monkeypatch.setenv("TDMV_THREADS", "3")
        b = empirical_pipeline(d, cfg, ShrinkageConfig("auto"), null_replicas=10, seed=2)
        assert a.to_dict() == b.to_dict()
        assert 0.0 <= a.delta <= 1.0 and 0.0 <= a.ks_distance <= 1.0

    def test_iid_spectrum_close_to_null(self):
        cfg = WindowConfig(10, 40)
        d = Dataset.from_prices(iid_prices(60 * 50 + 1, seed=8))
        rep = empirical_pipeline(d, cfg, null_replicas=60, seed=1)
        assert rep.ks_distance < 0.1

    def test_target_grid(self):
        S = AutoCovMatrix(np.diag([1.0, 2.0, 3.0]), Layer.PRICE)
        g = target_grid(S, 0.1)
        assert len(g) == 42 and np.all(np.diff(g) > 0)
        assert 0.01 in g and 0.06 in g
