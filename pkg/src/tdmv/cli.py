"""Batch command-line interface.

Every subcommand accepts ``--seed``, ``--out`` (``-`` for stdout) and
``--format csv|json``. Runtime failures print a one-line JSON object
``{"error": ..., "message": ...}`` on stderr and exit with status 1; usage
errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import cleaning, estimation, ingest, mclab, optimizer, procgen
from .errors import TdmvError
from .model import AutoCovMatrix, Kind, Layer, ProcessSpec, Provenance, SamplePath
from .serialize import (dumps_json, fmt, matrix_to_dict, read_matrix, table_csv,
                        write_matrix_csv)

logger = logging.getLogger("tdmv")


def _spec(args) -> ProcessSpec:
    kind = Kind.WHITE_NOISE if args.process == "wn" else Kind.AR1
    layer = Layer.INCREMENT if args.layer == "increment" else Layer.PRICE
    a = 0.0 if kind is Kind.WHITE_NOISE else args.a
    return ProcessSpec(kind, a, args.sigma2, layer, args.drift)


def _add_process(p):
    p.add_argument("--process", choices=["wn", "ar1"], default="ar1")
    p.add_argument("--a", type=float, default=0.0, help="AR(1) coefficient")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--layer", choices=["price", "increment"], default="price")
    p.add_argument("--drift", type=float, default=0.0, help="drift slope b in mu_t = b t")


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


# -- subcommands -----------------------------------------------------------

def cmd_synth(args):
    spec = _spec(args)
    path = procgen.simulate(spec, args.n, args.seed)
    if args.cumulate:
        path = procgen.cumulate(path, args.x0, spec.drift_slope)
    if args.format == "json":
        return dumps_json({"layer": path.layer.value, "seed": args.seed,
                           "spec": spec.to_dict(), "values": path.values.tolist()})
    return table_csv(["t", "value"], ((str(i + 1), v) for i, v in enumerate(path.values)))


def _weights_out(args, columns: dict[str, np.ndarray], extra: dict | None = None):
    if args.format == "json":
        d = {k: v.tolist() for k, v in columns.items()}
        d.update(extra or {})
        return dumps_json(d)
    T = len(next(iter(columns.values())))
    rows = ([str(t + 1), *[c[t] for c in columns.values()]] for t in range(T))
    return table_csv(["t", *columns.keys()], rows)


def _matrix_out(args, m: AutoCovMatrix, extra: dict | None = None) -> str:
    if args.format == "json":
        d = matrix_to_dict(m)
        d.update(extra or {})
        return dumps_json(d)
    return write_matrix_csv(m)


def cmd_truecov(args):
    spec = _spec(args)
    if args.what == "matrix":
        return _matrix_out(args, procgen.price_autocov(spec, args.T))
    if args.what == "increment-matrix":
        return _matrix_out(args, procgen.true_autocov(spec, args.T))
    if args.what == "inverse":
        inv = procgen.true_inverse(spec, args.T).matrix
        return _matrix_out(args, AutoCovMatrix(inv, Layer.PRICE, Provenance.TRUE))
    st = procgen.closed_form_global_strategy(spec, args.T)
    return _weights_out(args, {"weight": st.weights})


def _read_series(path: Path, column: str) -> np.ndarray:
    import csv

    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        col = ingest._find_column(reader.fieldnames or [], column)
        return np.array([float(r[col]) for r in reader if (r.get(col) or "").strip()])


def cmd_estimate(args):
    layer = Layer.INCREMENT if args.layer == "increment" else Layer.PRICE
    if args.input:
        values = _read_series(Path(args.input), args.column)
        path = SamplePath(values, layer)
    else:
        spec = _spec(args)
        path = procgen.simulate(spec, args.T + args.M, args.seed)
        layer = path.layer
    if args.detrend:
        if layer is Layer.PRICE:
            path = estimation.detrend_linear(path)[0]
        else:
            path = SamplePath(path.values - path.values.mean(), layer)
    if args.normalize:
        path = estimation.normalize_window(path)[0]
    m = estimation.sample_autocov(path, args.T, args.M)
    if args.p_transform:
        m = estimation.p_transform(m)
    return _matrix_out(args, m)


def _drift(args, T: int) -> np.ndarray:
    return optimizer.linear_drift(T, args.drift_slope)


def cmd_optimize(args):
    sigma = read_matrix(args.matrix)
    g = optimizer.global_minimum_strategy(sigma)
    cols = {"global_minimum": np.asarray(g.weights)}
    meta = {"global_minimum_risk": optimizer.strategy_risk(g, sigma)}
    mu = _drift(args, sigma.T)
    for t in _floats(args.targets or ""):
        st = optimizer.constrained_strategy(sigma, mu, t, args.x0)
        cols[f"target_{float(t)!r}"] = np.asarray(st.weights)
    return _weights_out(args, cols, meta if args.format == "json" else None)


def cmd_frontier(args):
    sigma = read_matrix(args.matrix)
    mu = _drift(args, sigma.T)
    if args.targets:
        targets = _floats(args.targets)
    else:
        lo, hi, n = args.grid
        targets = np.linspace(float(lo), float(hi), int(n)).tolist()
    pts = optimizer.frontier(sigma, mu, args.x0, targets)
    if args.format == "json":
        return dumps_json([{"target_return": p.target_return, "risk": p.risk,
                            "weights": p.strategy.weights.tolist(),
                            "lambda1": p.strategy.lambda1, "lambda2": p.strategy.lambda2}
                           for p in pts])
    return table_csv(["target_return", "risk"], ((p.target_return, p.risk) for p in pts))


def _spectrum_out(args, h: cleaning.SpectrumHistogram, extra: dict | None = None):
    if args.format == "json":
        d = {"bin_centers": h.bin_centers.tolist(), "densities": h.densities.tolist(),
             "bin_edges": h.bin_edges.tolist(), "log_eigenvalues": h.log_eigenvalues.tolist(),
             "count_nonpositive": h.count_nonpositive, "count_total": h.count_total}
        d.update(extra or {})
        return dumps_json(d)
    return table_csv(["bin_center", "density"], zip(h.bin_centers, h.densities))


def _bins(args):
    return args.bins if args.bins is None else int(args.bins)


def cmd_spectrum(args):
    return _spectrum_out(args, cleaning.eigen_spectrum(read_matrix(args.matrix), _bins(args)))


def cmd_nullspec(args):
    h = cleaning.null_model_spectrum(args.T, args.M, args.replicas, args.seed, _bins(args))
    return _spectrum_out(args, h)


def cmd_clean(args):
    sigma = read_matrix(args.matrix)
    if args.delta == "auto":
        others = [read_matrix(p) for p in (args.windows or [])]
        delta = cleaning.auto_intensity_from_matrices(
            [m.entries for m in [sigma, *others]])
    else:
        delta = float(args.delta)
    out = cleaning.shrink(sigma, delta)
    if args.p_transform:
        out = estimation.p_transform(out)
    return _matrix_out(args, out, {"delta": delta})


def _mc_csv(report: mclab.ExperimentReport, table: str) -> str:
    rows = [report.true_row, *report.rows]
    if table == "risks":
        true_risk = report.true_row.global_minimum.mean_in_sample_risk
        out = []
        for r in rows:
            g = r.global_minimum
            out.append((r.alpha, r.M or 0, r.failures,
                        None if g is None else g.mean_in_sample_risk,
                        None if g is None else g.std_in_sample_risk,
                        None if g is None else g.mean_true_risk, true_risk))
        return table_csv(["alpha", "M", "failures", "mean_in_sample_risk",
                          "std_in_sample_risk", "mean_true_risk_of_estimate",
                          "true_risk"], out)
    out = []
    for r in rows:
        probs = [] if r.global_minimum is None else [r.global_minimum, *r.targets]
        for st in probs:
            name = "global_minimum" if st.target is None else f"target_{float(st.target)!r}"
            for i, (m, s) in enumerate(zip(st.mean, st.std)):
                out.append((r.alpha, name, str(i + 1), m, s))
    return table_csv(["alpha", "problem", "index", "mean", "std"], out)


def cmd_mc(args):
    cfg_d = json.loads(Path(args.config).read_text())
    if args.seed_given:
        cfg_d["seed"] = args.seed
    cfg = mclab.ExperimentConfig.from_dict(cfg_d)
    report = mclab.run_alpha_sweep(cfg)
    logger.info("mc finished in %.2fs", report.wall_clock)
    if args.format == "json":
        return dumps_json(report.to_dict(include_timing=args.timing))
    return _mc_csv(report, args.table)


def cmd_pipeline(args):
    tr = ingest.Transform.RAW if args.raw_prices else ingest.Transform.LOG
    data = ingest.load_csv(args.input, args.date_column, args.price_column, tr)
    cfg = estimation.WindowConfig(args.T, args.M, args.stride)
    if args.clean == "none":
        shrink_cfg = None
    else:
        shrink_cfg = cleaning.ShrinkageConfig(args.clean if args.clean == "auto"
                                              else float(args.clean))
    targets = _floats(args.targets) if args.targets else None
    rep = ingest.empirical_pipeline(data, cfg, shrink_cfg, targets,
                                    null_replicas=args.null_replicas, seed=args.seed)
    if args.format == "json":
        return dumps_json(rep.to_dict())
    rows = []
    for w in rep.windows:
        r = w.gms_risk
        rows.append((str(w.index), w.start_date.isoformat() if w.start_date else "",
                     w.end_date.isoformat() if w.end_date else "", w.status,
                     None if r is None else r.in_sample, None if r is None else r.true_risk,
                     None if r is None else r.out_of_sample))
    return table_csv(["window", "start_date", "end_date", "status", "in_sample",
                      "true_risk", "out_of_sample"], rows)


# -- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", default="-", help="output file, '-' for stdout")
    common.add_argument("--format", choices=["csv", "json"], default="csv")

    ap = argparse.ArgumentParser(prog="tdmv", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="simulate a sample path")
    _add_process(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cumulate", action="store_true", help="sum increments into prices")
    p.add_argument("--x0", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("truecov", parents=[common],
                       help="true matrix, closed-form inverse or global-minimum strategy")
    _add_process(p)
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--what", choices=["matrix", "increment-matrix", "inverse", "strategy"],
                   default="matrix")
    p.set_defaults(func=cmd_truecov)

    p = sub.add_parser("estimate", parents=[common], help="sample auto-covariance matrix")
    _add_process(p)
    p.add_argument("--input", help="CSV with a value column (e.g. synth output)")
    p.add_argument("--column", default="value")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--detrend", action="store_true")
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--p-transform", action="store_true",
                   help="map an increment estimate to price level")
    p.set_defaults(func=cmd_estimate)

    for name, fn, hlp in [("optimize", cmd_optimize, "optimal strategies for a matrix"),
                          ("frontier", cmd_frontier, "risk-return frontier")]:
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--matrix", required=True)
        p.add_argument("--drift-slope", type=float, default=0.0)
        p.add_argument("--x0", type=float, default=0.0)
        p.add_argument("--targets", help="comma-separated target returns")
        if name == "frontier":
            p.add_argument("--grid", nargs=3, metavar=("LO", "HI", "N"),
                           default=("0", "0.001", "21"))
        p.set_defaults(func=fn)

    p = sub.add_parser("spectrum", parents=[common], help="log-eigenvalue density")
    p.add_argument("--matrix", required=True)
    p.add_argument("--bins", default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("nullspec", parents=[common], help="independent-increment null spectrum")
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--bins", default=None)
    p.set_defaults(func=cmd_nullspec)

    p = sub.add_parser("clean", parents=[common], help="shrink an increment matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--windows", nargs="*", help="further window matrices for --delta auto")
    p.add_argument("--delta", default="auto")
    p.add_argument("--p-transform", action="store_true")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo alpha sweep")
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--table", choices=["weights", "risks"], default="weights")
    p.add_argument("--timing", action="store_true", help="include wall-clock in JSON")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("pipeline", parents=[common], help="empirical end-to-end analysis")
    p.add_argument("--input", required=True)
    p.add_argument("--date-column", default="Date")
    p.add_argument("--price-column", default="Adj Close")
    p.add_argument("--raw-prices", action="store_true")
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--clean", default="auto", help="none, auto or an intensity in [0, 1]")
    p.add_argument("--targets")
    p.add_argument("--null-replicas", type=int, default=200)
    p.set_defaults(func=cmd_pipeline)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    try:
        text = args.func(args)
    except (TdmvError, OSError, ValueError, KeyError) as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 1
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


cli_dispatch = main

if __name__ == "__main__":
    sys.exit(main())
