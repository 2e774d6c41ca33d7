"""Evolution time series, force-profile matrices and the metrics document."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from antonov.core.tables import write_csv, write_json
from antonov.features.dynamics.domain import EvolutionResult

SERIES_COLUMNS = ("t", "force_norm", "force_rate_norm", "potential_sup", "energy")


def save_series_csv(result: EvolutionResult, path: Path, *, distance: list[float] | None = None) -> Path:
    header = SERIES_COLUMNS + (("distance",) if distance is not None else ())
    rows = result.series_rows()
    if distance is not None:
        rows = [row + [float(d)] for row, d in zip(rows, distance, strict=True)]
    return write_csv(path, header, rows)


def save_profiles_csv(result: EvolutionResult, path: Path, *, stride: int = 1) -> Path:
    """One row per kept snapshot: t followed by F(t, x_i); the header carries the x values."""
    header = ["t"] + [repr(float(x)) for x in result.x]
    rows = (
        [float(result.times[i])] + [float(v) for v in result.force[i]]
        for i in range(0, result.times.size, max(1, stride))
    )
    return write_csv(path, header, rows)


def save_metrics(metrics: dict[str, Any], path: Path) -> Path:
    return write_json(path, metrics)
