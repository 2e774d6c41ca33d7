"""bands.csv (l, beta_min, beta_max), segments.json and the gap report."""

from __future__ import annotations

from pathlib import Path
from typing import Any

from antonov.core.tables import write_csv, write_json
from antonov.features.band_structure.domain import BandStructure
from antonov.features.band_structure.service import exceptional_edges, gaps

BAND_COLUMNS = ("l", "beta_min", "beta_max")


def save_bands_csv(bands: BandStructure, path: Path) -> Path:
    return write_csv(path, BAND_COLUMNS, ([b.l, b.beta_min, b.beta_max] for b in bands.bands))


def save_segments_json(bands: BandStructure, path: Path) -> Path:
    return write_json(path, {"segments": [s.to_dict() for s in bands.segments]})


def gap_report(bands: BandStructure) -> dict[str, Any]:
    return {
        **bands.no_gap_condition(),
        "degenerate": bands.degenerate,
        "gaps": [[s.lo, s.hi] for s in gaps(bands.segments)],
        "edges": exceptional_edges(bands),
        "lmax": bands.lmax,
    }


def save_gap_report(bands: BandStructure, path: Path) -> Path:
    return write_json(path, gap_report(bands))
