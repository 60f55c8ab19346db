"""Text formats for matrices, strategies and tables.

Matrix CSV layout::

    # T=3,layer=PriceLevel,provenance=Sampled,M=20
    1,0.5,0.25
    0.5,1,0.5
    0.25,0.5,1

Numbers are written with 17 significant digits, which round-trips every
double exactly.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from .errors import CsvFormatError
from .model import AutoCovMatrix, Layer, Provenance

__all__ = [
    "dumps_json",
    "fmt",
    "matrix_from_dict",
    "matrix_to_dict",
    "read_matrix",
    "table_csv",
    "write_matrix_csv",
]


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if np.isnan(x):
        return "nan"
    return "%.17g" % x


def write_matrix_csv(m: AutoCovMatrix) -> str:
    head = f"# T={m.T},layer={m.layer.value},provenance={m.provenance.value}"
    if m.M is not None:
        head += f",M={m.M}"
    rows = [",".join(fmt(v) for v in row) for row in m.entries]
    return "\n".join([head, *rows]) + "\n"


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise CsvFormatError("matrix file must start with a '# T=...' header", 1)
    fields = {}
    for part in line[1:].strip().split(","):
        if "=" not in part:
            raise CsvFormatError(f"bad header field {part!r}", 1)
        k, v = part.split("=", 1)
        fields[k.strip()] = v.strip()
    return fields


def parse_matrix_csv(text: str) -> AutoCovMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise CsvFormatError("empty matrix file")
    h = _parse_header(lines[0])
    try:
        T = int(h["T"])
        rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    except (KeyError, ValueError) as e:
        raise CsvFormatError(f"malformed matrix file: {e}") from None
    E = np.array(rows, dtype=float)
    if E.shape != (T, T):
        raise CsvFormatError(f"header says T={T} but body has shape {E.shape}")
    M = int(h["M"]) if h.get("M") else None
    return AutoCovMatrix(E, Layer(h.get("layer", "PriceLevel")),
                         Provenance(h.get("provenance", "Sampled")), M)


def matrix_to_dict(m: AutoCovMatrix) -> dict:
    return {"T": m.T, "layer": m.layer.value, "provenance": m.provenance.value,
            "M": m.M, "entries": m.entries.tolist()}


def matrix_from_dict(d: dict) -> AutoCovMatrix:
    return AutoCovMatrix(np.array(d["entries"], float), Layer(d["layer"]),
                         Provenance(d.get("provenance", "Sampled")), d.get("M"))


def read_matrix(path) -> AutoCovMatrix:
    """Read a matrix written in either the CSV or the JSON format."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return matrix_from_dict(json.loads(text))
    return parse_matrix_csv(text)


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"


def table_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()
