"""Band edges, segment decomposition and the exceptional edge set."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping
from dataclasses import replace

from antonov.config import DEFAULT_LMAX
from antonov.core.errors import DomainError
from antonov.features.action_angle.domain import ActionAngleChart
from antonov.features.band_structure.domain import Band, BandStructure, Segment, band_scale

logger = logging.getLogger(__name__)

DEGENERATE_RTOL = 1e-9
EDGE_RTOL = 1e-12


def build_bands(chart: ActionAngleChart, lmax: int = DEFAULT_LMAX) -> BandStructure:
    """Bands [(4 pi l)^2 / T(E0)^2, (4 pi l)^2 / T(Emin)^2] for l = 1..lmax."""
    if lmax < 1:
        raise DomainError("lmax must be >= 1")
    t_top = chart.period_top
    t_bottom = chart.period_bottom
    degenerate = abs(t_top - t_bottom) <= DEGENERATE_RTOL * t_top
    bands = tuple(
        Band(l, band_scale(l) / t_top**2, band_scale(l) / t_bottom**2) for l in range(1, lmax + 1)
    )
    if degenerate:
        logger.warning(
            "constant period T=%.10g: bands collapse to points", t_top,
            extra={"event": "degenerate_bands"},
        )
    structure = BandStructure(
        chart=chart,
        lmax=int(lmax),
        bands=bands,
        period_top=t_top,
        period_bottom=t_bottom,
        degenerate=degenerate,
    )
    structure = replace(structure, segments=tuple(decompose_segments(structure)))
    logger.info(
        "bands l=1..%d: beta_1 in [%.8g, %.8g], %d segments",
        lmax, bands[0].beta_min, bands[0].beta_max, len(structure.segments),
        extra={"event": "bands_built"},
    )
    return structure


def decompose_intervals(intervals: Mapping[int, tuple[float, float]]) -> list[Segment]:
    """Sweep sorted endpoints; each open piece carries the modes whose interval covers it."""
    points = sorted({v for lo, hi in intervals.values() for v in (lo, hi)})
    out: list[Segment] = []
    for a, b in zip(points, points[1:], strict=False):
        if not b > a:
            continue
        modes = tuple(sorted(l for l, (lo, hi) in intervals.items() if lo <= a and b <= hi))
        out.append(Segment(a, b, modes))
    return out


def decompose_segments(bands: BandStructure) -> list[Segment]:
    return decompose_intervals({b.l: (b.beta_min, b.beta_max) for b in bands.bands})


def gaps(segments: Iterable[Segment]) -> list[Segment]:
    return [s for s in segments if s.is_gap]


def exceptional_edges(bands: BandStructure) -> list[float]:
    """All band edges, sorted, with coincident edges merged."""
    out: list[float] = []
    for v in sorted(bands.edges()):
        if out and abs(v - out[-1]) <= EDGE_RTOL * max(abs(v), 1.0):
            continue
        out.append(v)
    return out
