"""Use case: operators A0, B, A, the eigenvalue report and the embedded-eigenvalue scan."""

from __future__ import annotations

import logging

from antonov.application.use_cases.common import (
    CommandResult,
    build_stack,
    close_run,
    locate_exceptional,
    open_run,
)
from antonov.domain.run_config import RunConfig
from antonov.features.band_structure import BandStructure
from antonov.features.operators import (
    ModeGrid,
    OperatorMatrix,
    boundary_BR0,
    boundary_holder_report,
    build_A,
    build_B,
    coupling_sweep,
    epsilon_sweep,
    kernel_form_defect,
    positivity_report,
    second_resolvent_residual,
    singular_value_report,
)
from antonov.features.operators.repository import (
    dump_matrix,
    eigenvalue_report,
    save_eigenvalue_report,
    save_exceptional_set,
    save_scan_csv,
)

logger = logging.getLogger(__name__)

SWEEP_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0)


def widest_segment(bands: BandStructure) -> tuple[float, float]:
    """The widest non-gap segment; mid-band points are taken from its middle half."""
    segs = [s for s in bands.segments if not s.is_gap]
    seg = max(segs, key=lambda s: s.hi - s.lo)
    return seg.lo, seg.hi


class ModesUseCase:
    def execute(self, cfg: RunConfig) -> CommandResult:
        ctx = open_run(cfg, "modes")
        grid = build_stack(cfg).require_grid()
        B = build_B(grid)
        A, system = build_A(grid, B=B, coupling=cfg.coupling)
        positivity = positivity_report(grid, B, system)
        scan, exceptional = locate_exceptional(cfg, grid, token=ctx.token)

        report = eigenvalue_report(system, scan, positivity)
        report["coupling_sweep"] = coupling_sweep(scan, SWEEP_FACTORS)
        report["checks"] = self._checks(grid, A, B, cfg)
        if not grid.bands.degenerate:
            lo, hi = widest_segment(grid.bands)
            mid = 0.5 * (lo + hi)
            quarter = 0.25 * (hi - lo)
            report["epsilon_sweep"] = {
                "gamma": mid,
                "norms": epsilon_sweep(grid, mid, edge_margin=cfg.edge_margin),
            }
            report["boundary_holder"] = boundary_holder_report(grid, (mid - quarter, mid + quarter))
            report["singular_values"] = singular_value_report(grid, complex(mid, 1e-2 * mid))
            br0 = boundary_BR0(grid, mid, 1, edge_margin=cfg.edge_margin, coupling=cfg.coupling)
            br0_path = dump_matrix(br0, ctx.path("BR0_plus.bin"))
        else:
            logger.warning("bands are degenerate; boundary operators skipped", extra={"event": "degenerate_bands"})
            br0_path = None

        artifacts = {
            "eigenvalues": save_eigenvalue_report(report, ctx.path("eigenvalues.json")),
            "gamma_scan": save_scan_csv(scan, ctx.path("gamma_scan.csv")),
            "exceptional": save_exceptional_set(exceptional, ctx.path("exceptional.json")),
            "A": dump_matrix(A, ctx.path("A.bin")),
            "B": dump_matrix(B, ctx.path("B.bin")),
        }
        if br0_path is not None:
            artifacts["BR0_plus"] = br0_path
        summary = {
            "min_eigenvalue": system.min_value,
            "counts": system.counts(),
            "candidates": scan.candidates(),
            "signs_agree": scan.signs_agree(),
            "exceptional": len(exceptional),
        }
        return close_run(ctx, artifacts, summary)

    @staticmethod
    def _checks(grid: ModeGrid, A: OperatorMatrix, B: OperatorMatrix, cfg: RunConfig) -> dict[str, float]:
        return {
            "second_resolvent": second_resolvent_residual(grid, A, B.scaled(cfg.coupling), -1.0),
            "kernel_form": kernel_form_defect(grid, -1.0),
        }
