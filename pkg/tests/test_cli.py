import json
import subprocess
import sys

import numpy as np
import pytest

from tdmv.cli import main
from tdmv.serialize import parse_matrix_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_truecov_strategy(capsys):
    code, out, _ = run(capsys, "truecov", "--a", "0.8", "--layer", "increment", "--T", "10",
                       "--what", "strategy")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "t,weight" and len(lines) == 11
    assert float(lines[1].split(",")[1]) == pytest.approx(1.8)
    assert float(lines[2].split(",")[1]) == pytest.approx(-0.8)


def test_matrix_csv_roundtrips_exactly(capsys):
    code, out, _ = run(capsys, "truecov", "--a", "0.3", "--T", "4")
    m = parse_matrix_csv(out)
    assert code == 0 and m.entries[0, 1] == 0.3 and m.entries[0, 3] == 0.3 ** 3


def test_estimate_then_optimize(capsys, tmp_path):
    mat = tmp_path / "m.csv"
    code, _, _ = run(capsys, "estimate", "--a", "0.5", "--layer", "increment", "--T", "6",
                     "--M", "60", "--seed", "3", "--normalize", "--p-transform",
                     "--out", str(mat))
    assert code == 0 and mat.read_text().startswith("# T=6,layer=PriceLevel")
    code, out, _ = run(capsys, "optimize", "--matrix", str(mat), "--drift-slope", "0.01",
                       "--targets", "0.02,0.05", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert sum(d["global_minimum"]) == pytest.approx(1.0)
    w = np.array(d["target_0.05"])
    assert w @ (0.01 * np.arange(1, 7)) == pytest.approx(0.05)


def test_synth_pipeline_file(capsys, tmp_path):
    series = tmp_path / "s.csv"
    run(capsys, "synth", "--a", "0.2", "--n", "200", "--seed", "1", "--out", str(series))
    code, out, _ = run(capsys, "estimate", "--input", str(series), "--layer", "increment",
                       "--T", "5", "--M", "150")
    assert code == 0 and parse_matrix_csv(out).T == 5


def test_mc_deterministic_across_threads(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spec": {"kind": "AR1", "a": 0.8, "drift_slope": 1e-4},
                               "T": 5, "alphas": [0.5, 0.1], "samples": 300,
                               "targets": [0.001], "seed": 7}))
    outs = []
    for threads in ("1", "4", "4"):
        monkeypatch.setenv("TDMV_THREADS", threads)
        code, out, _ = run(capsys, "mc", "--config", str(cfg), "--format", "json")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1] == outs[2]
    assert "wall_clock" not in outs[0]
    code, out, _ = run(capsys, "mc", "--config", str(cfg), "--format", "json", "--timing")
    assert "wall_clock" in json.loads(out)


def test_mc_csv_tables(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spec": {"kind": "AR1", "a": 0.5}, "T": 4, "alphas": [0.5],
                               "samples": 10}))
    code, out, _ = run(capsys, "mc", "--config", str(cfg))
    assert code == 0 and out.startswith("alpha")
    code, out, _ = run(capsys, "mc", "--config", str(cfg), "--table", "risks")
    assert code == 0 and len(out.strip().splitlines()) >= 2


def test_pipeline_and_spectrum(capsys, tmp_path):
    rng = np.random.default_rng(0)
    prices = 100 * np.exp(np.cumsum(0.01 * rng.standard_normal(4 * 30 + 1)))
    csv = tmp_path / "px.csv"
    csv.write_text("Date,Adj Close\n" + "".join(
        f"2020-{1 + i // 28:02d}-{1 + i % 28:02d},{float(p)!r}\n" for i, p in enumerate(prices)))
    code, out, _ = run(capsys, "pipeline", "--input", str(csv), "--T", "10", "--M", "20",
                       "--null-replicas", "5", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["windows_total"] == 4 and d["windows_processed"] == 4
    assert 0 <= d["delta"] <= 1 and d["ks_distance"] is not None
    code, out, _ = run(capsys, "nullspec", "--T", "5", "--M", "10", "--replicas", "3")
    assert code == 0 and out.startswith("bin_center")


def test_clean(capsys, tmp_path):
    m = tmp_path / "m.csv"
    m.write_text("# T=2,layer=IncrementLevel,provenance=Sampled,M=10\n2,1\n1,3\n")
    code, out, _ = run(capsys, "clean", "--matrix", str(m), "--delta", "0.5")
    assert code == 0
    c = parse_matrix_csv(out)
    assert c.entries.tolist() == [[2.0, 0.5], [0.5, 3.0]]
    assert c.provenance.value == "Cleaned"


def test_error_exit_codes(capsys, tmp_path):
    code, _, err = run(capsys, "optimize", "--matrix", str(tmp_path / "missing.csv"))
    assert code == 1 and json.loads(err)["error"]
    singular = tmp_path / "s.csv"
    singular.write_text("# T=2,layer=PriceLevel,provenance=Sampled\n1,1\n1,1\n")
    code, _, err = run(capsys, "optimize", "--matrix", str(singular))
    assert code == 1 and json.loads(err)["error"] == "IllConditionedError"
    code, _, err = run(capsys, "truecov", "--a", "1.2", "--T", "3")
    assert code == 1 and json.loads(err)["error"] == "ValidationError"
    with pytest.raises(SystemExit) as e:
        main(["truecov", "--bogus"])
    assert e.value.code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "tdmv", "truecov", "--T", "3"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert res.stdout.splitlines()[1:] == ["1,0,0", "0,1,0", "0,0,1"]
