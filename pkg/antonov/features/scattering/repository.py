"""scattering.json residual report and the beta-resolved row CSV."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from antonov.core.tables import write_csv, write_json
from antonov.features.scattering.domain import ScatteringResult

ROW_COLUMNS = (
    "beta",
    "l",
    "node",
    "norm_free",
    "norm_plus",
    "norm_minus",
    "cond_plus",
    "cond_minus",
    "accepted",
)


def save_rows_csv(result: ScatteringResult, path: Path) -> Path:
    free, plus, minus = result.free, result.plus, result.minus
    nf, np_, nm = free.row_norms(), plus.row_norms(), minus.row_norms()
    rows = (
        [
            float(free.beta[i]),
            int(free.mode[i]),
            int(free.node[i]),
            float(nf[i]),
            float(np_[i]),
            float(nm[i]),
            float(plus.condition[i]),
            float(minus.condition[i]),
            int(plus.accepted[i] and minus.accepted[i]),
        ]
        for i in range(free.shape[0])
    )
    return write_csv(path, ROW_COLUMNS, rows)


def scattering_report(
    result: ScatteringResult,
    *,
    refinement: dict[str, Any] | None = None,
    time_check: dict[str, Any] | None = None,
) -> dict[str, Any]:
    report: dict[str, Any] = {
        **result.residuals.to_dict(),
        "rows": {
            "total": result.free.shape[0],
            "rejected_free": result.free.n_rejected,
            "rejected_plus": result.plus.n_rejected,
            "rejected_minus": result.minus.n_rejected,
        },
    }
    if refinement is not None:
        report["refinement"] = refinement
    if time_check is not None:
        report["time_dependent"] = {
            sign: {k: v for k, v in check.items() if k in ("late_cesaro", "sign")}
            for sign, check in time_check.items()
        }
    return report


def save_scattering_report(report: dict[str, Any], path: Path) -> Path:
    return write_json(path, report)
