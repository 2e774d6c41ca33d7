"""Chart CSV (E, x_plus, T, dT), stored next to the steady-state JSON and reused on a cache hit."""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path

from antonov.core.errors import InfrastructureError
from antonov.core.tables import read_csv, write_csv
from antonov.features.action_angle.domain import ActionAngleChart

logger = logging.getLogger(__name__)

CHART_COLUMNS = ("E", "x_plus", "T", "dT")


def chart_cache_path(state_path: Path, chart_size: int, quad_tol: float, theta_table: int) -> Path:
    token = f"{int(chart_size)}|{float(quad_tol)!r}|{int(theta_table)}"
    key = hashlib.sha256(token.encode("utf-8")).hexdigest()[:8]
    return state_path.with_name(f"{state_path.stem}.chart_{key}.csv")


def save_chart_csv(chart: ActionAngleChart, path: Path) -> Path:
    return write_csv(
        path,
        CHART_COLUMNS,
        ([r["E"], r["x_plus"], r["T"], r["dT"]] for r in chart.rows()),
    )


def load_chart_rows(path: Path) -> list[dict[str, float]] | None:
    """Stored chart rows, or None when the file is missing or unreadable."""
    if not path.exists():
        return None
    try:
        header, rows = read_csv(path)
        if tuple(header) != CHART_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        return [{k: float(v) for k, v in zip(header, row, strict=True)} for row in rows]
    except (InfrastructureError, ValueError):
        logger.warning("ignoring corrupt chart cache %s", path, exc_info=True)
        return None
