"""Use case: band structure, segments and the no-gap condition."""

from __future__ import annotations

from antonov.application.use_cases.common import CommandResult, build_stack, close_run, open_run
from antonov.domain.run_config import RunConfig
from antonov.features.band_structure.repository import (
    gap_report,
    save_bands_csv,
    save_gap_report,
    save_segments_json,
)


class BandsUseCase:
    def execute(self, cfg: RunConfig) -> CommandResult:
        ctx = open_run(cfg, "bands")
        bands = build_stack(cfg, with_grid=False).bands
        artifacts = {
            "bands": save_bands_csv(bands, ctx.path("bands.csv")),
            "segments": save_segments_json(bands, ctx.path("segments.json")),
            "gap_report": save_gap_report(bands, ctx.path("gap_report.json")),
        }
        report = gap_report(bands)
        summary = {
            "lmax": bands.lmax,
            "degenerate": bands.degenerate,
            "T_E0": report["T_E0"],
            "T_Emin": report["T_Emin"],
            "no_gap": report["no_gap"],
            "gaps": len(report["gaps"]),
        }
        return close_run(ctx, artifacts, summary)
