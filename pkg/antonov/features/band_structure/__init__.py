from .domain import Band, BandStructure, Segment, band_scale
from .service import build_bands, decompose_intervals, decompose_segments, exceptional_edges, gaps

__all__ = [
    "Band",
    "BandStructure",
    "Segment",
    "band_scale",
    "build_bands",
    "decompose_intervals",
    "decompose_segments",
    "exceptional_edges",
    "gaps",
]
