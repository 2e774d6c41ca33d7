"""Operator artifacts: gamma-scan CSV, eigenvalue and exceptional-set JSON, dense matrix dumps.

Matrix dump layout: three little-endian int64 (rows, cols, complex flag) followed
by the row-major body as float64; complex entries are interleaved real/imag.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any

import numpy as np
from numpy.typing import NDArray

from antonov.core.errors import InfrastructureError
from antonov.core.tables import write_csv, write_json
from antonov.features.operators.domain import (
    EigenSystem,
    ExceptionalPoint,
    OperatorMatrix,
    ScanResult,
)

SCAN_COLUMNS = ("gamma", "dist_plus", "dist_minus", "flag_plus", "flag_minus")
HEADER = np.dtype("<i8")


def save_scan_csv(scan: ScanResult, path: Path) -> Path:
    plus, minus = scan.flags_plus, scan.flags_minus
    return write_csv(
        path,
        SCAN_COLUMNS,
        (p.to_row() + [int(i in plus), int(i in minus)] for i, p in enumerate(scan.points)),
    )


def eigenvalue_report(
    system: EigenSystem,
    scan: ScanResult | None = None,
    positivity: dict[str, Any] | None = None,
) -> dict[str, Any]:
    values = system.values
    report: dict[str, Any] = {
        "counts": system.counts(),
        "min_eigenvalue": system.min_value,
        "discrete": values[system.indices("discrete")].tolist(),
        "gap": values[system.indices("gap")].tolist(),
        "unresolved": values[system.indices("unresolved")].tolist(),
    }
    if scan is not None:
        report["embedded_candidates"] = {
            "plus": [c.to_dict() for c in scan.candidates_plus],
            "minus": [c.to_dict() for c in scan.candidates_minus],
            "signs_agree": scan.signs_agree(),
            "skipped": list(scan.skipped),
        }
    if positivity is not None:
        report["positivity"] = positivity
    return report


def save_eigenvalue_report(report: dict[str, Any], path: Path) -> Path:
    return write_json(path, report)


def save_exceptional_set(points: list[ExceptionalPoint], path: Path) -> Path:
    return write_json(path, {"exceptional": [p.to_dict() for p in points]})


def dump_matrix(op: OperatorMatrix | NDArray[Any], path: Path) -> Path:
    matrix = np.asarray(op.matrix if isinstance(op, OperatorMatrix) else op)
    if matrix.ndim != 2:
        raise InfrastructureError(f"cannot dump array of rank {matrix.ndim}")
    is_complex = bool(np.iscomplexobj(matrix))
    body = matrix.astype("<c16" if is_complex else "<f8", copy=False)
    header = np.array([matrix.shape[0], matrix.shape[1], int(is_complex)], dtype=HEADER)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as f:
            f.write(header.tobytes())
            f.write(np.ascontiguousarray(body).tobytes())
    except OSError as e:
        raise InfrastructureError(f"cannot write {path}", cause=e) from e
    return path


def load_matrix(path: Path) -> NDArray[Any]:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise InfrastructureError(f"cannot read {path}", cause=e) from e
    if len(raw) < 3 * HEADER.itemsize:
        raise InfrastructureError(f"{path} is not a matrix dump")
    rows, cols, flag = (int(v) for v in np.frombuffer(raw[: 3 * HEADER.itemsize], dtype=HEADER))
    dtype = np.dtype("<c16" if flag else "<f8")
    body = raw[3 * HEADER.itemsize :]
    if len(body) != rows * cols * dtype.itemsize:
        raise InfrastructureError(f"{path}: body size does not match header {rows}x{cols}")
    return np.frombuffer(body, dtype=dtype).reshape(rows, cols).copy()
