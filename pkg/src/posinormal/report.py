"""JSON matrix files, run reports and sigma-curve CSV."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError
from .matop import OperatorMatrix
from .numkernel import ToleranceConfig


def matrix_to_record(M, label: str | None = None) -> dict:
    """MatrixFile record: row-major ``[re, im]`` pairs."""
    arr = np.asarray(M, dtype=complex)
    rec = {
        "rows": int(arr.shape[0]),
        "cols": int(arr.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in arr.ravel()],
    }
    if label is None and isinstance(M, OperatorMatrix):
        label = M.label
    if label:
        rec["label"] = label
    return rec


def matrix_from_record(rec: dict) -> OperatorMatrix:
    try:
        rows, cols = int(rec["rows"]), int(rec["cols"])
        entries = rec["entries"]
        if len(entries) != rows * cols:
            raise InputError(f"expected {rows * cols} entries, found {len(entries)}")
        values = [complex(float(re), float(im)) for re, im in entries]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed matrix file: {exc}") from exc
    if rows != cols:
        raise InputError(f"operator matrix must be square, got {rows}x{cols}")
    arr = np.array(values, dtype=complex).reshape(rows, cols)
    return OperatorMatrix(arr, str(rec.get("label", "")))


def write_matrix_file(path, M, label: str | None = None):
    Path(path).write_text(json.dumps(matrix_to_record(M, label), indent=1) + "\n", encoding="utf-8")


def read_matrix_file(path) -> OperatorMatrix:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read matrix file {path}: {exc}") from exc
    return matrix_from_record(data)


def jsonable(obj):
    """Convert results (dataclasses, numpy values, complex) into JSON-safe values."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 0:
                return jsonable(complex(obj))
            return [jsonable(row) for row in obj]
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [jsonable(obj.real), jsonable(obj.imag)]
    return obj


def run_report(command: str, tol: ToleranceConfig, provenance: dict, results, summary: dict,
               timestamp: bool = True) -> dict:
    report = {
        "tool": "posinormal",
        "version": __version__,
        "command": command,
        "tolerance": tol.as_dict(),
        "input": provenance,
        "results": jsonable(results),
        "summary": jsonable(summary),
    }
    if timestamp:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


CSV_COLUMNS = ("n", "k", "sigma_min_nonzero", "rank")


def curves_to_csv(diagnoses) -> str:
    """CSV with one row per (n, k); empty sigma when the power is zero."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for d in diagnoses:
        for p in d.curve:
            writer.writerow([p.n, d.power, "" if p.sigma is None else repr(p.sigma), p.rank])
    return buf.getvalue()
