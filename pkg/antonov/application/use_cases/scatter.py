"""Use case: generalized Fourier maps, wave operators and the residual report."""

from __future__ import annotations

from dataclasses import replace
from typing import Any

import numpy as np

from antonov.application.use_cases.common import (
    CommandResult,
    build_stack,
    close_run,
    locate_exceptional,
    open_run,
)
from antonov.core.parallel import CancelToken
from antonov.domain.run_config import RunConfig
from antonov.features.operators import ExceptionalPoint, ModeGrid, build_A, build_B
from antonov.features.scattering import (
    ScatteringResult,
    refinement_table,
    run_scattering,
    smooth_subspace,
    time_dependent_check,
)
from antonov.features.scattering.repository import (
    save_rows_csv,
    save_scattering_report,
    scattering_report,
)

TIME_CHECK_VECTORS = 3


def scatter_on(
    cfg: RunConfig,
    grid: ModeGrid,
    *,
    exceptional: list[ExceptionalPoint] | None = None,
    token: CancelToken | None = None,
) -> tuple[ScatteringResult, dict[str, Any]]:
    """Scattering run on ``grid`` plus the time-dependent check of both wave operators."""
    B = build_B(grid)
    A, system = build_A(grid, B=B, coupling=cfg.coupling)
    if exceptional is None:
        _, exceptional = locate_exceptional(cfg, grid, token=token)
    result = run_scattering(
        grid,
        A,
        system,
        exceptional,
        coupling=cfg.coupling,
        n_beta=cfg.n_beta,
        cond_max=cfg.cond_max,
        edge_margin=cfg.edge_margin,
        max_workers=cfg.max_workers,
        token=token,
    )
    vectors = smooth_subspace(grid)[:, :TIME_CHECK_VECTORS]
    times = np.linspace(0.0, cfg.horizon, cfg.time_steps)
    checks = {
        name: time_dependent_check(
            system, grid.beta_flat, result.waves.wave(sign), vectors, times, sign=sign
        )
        for sign, name in ((1, "plus"), (-1, "minus"))
    }
    return result, checks


class ScatterUseCase:
    def execute(self, cfg: RunConfig) -> CommandResult:
        ctx = open_run(cfg, "scatter")
        grid = build_stack(cfg).require_grid()
        result, checks = scatter_on(cfg, grid, token=ctx.token)

        refinement = None
        if cfg.refine:
            fine_cfg = replace(cfg, n_energy=2 * cfg.n_energy, n_beta=2 * cfg.n_beta)
            fine_grid = build_stack(fine_cfg).require_grid()
            fine, _ = scatter_on(fine_cfg, fine_grid, token=ctx.token)
            refinement = refinement_table(result.residuals, fine.residuals)

        report = scattering_report(result, refinement=refinement, time_check=checks)
        artifacts = {
            "scattering": save_scattering_report(report, ctx.path("scattering.json")),
            "beta_rows": save_rows_csv(result, ctx.path("beta_rows.csv")),
        }
        summary = {
            "residuals": result.residuals.values,
            "checks": result.residuals.checks,
            "refined": refinement is not None,
        }
        return close_run(ctx, artifacts, summary)
