"""Use case: Antonov wave evolution, damping metrics and the free-flow comparison."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from antonov.application.use_cases.common import (
    CommandResult,
    build_stack,
    close_run,
    locate_exceptional,
    open_run,
)
from antonov.core.errors import DomainError
from antonov.core.parallel import CancelToken
from antonov.domain.run_config import RunConfig
from antonov.features.dynamics import (
    EvolutionResult,
    InitialData,
    ac_projected,
    damping_report,
    eigenvector_data,
    free_flow_comparison,
    make_initial_data,
    run_evolution,
    x_grid,
)
from antonov.features.dynamics.repository import save_metrics, save_profiles_csv, save_series_csv
from antonov.features.operators import ExceptionalPoint, ModeGrid, ScanResult, build_A, build_B
from antonov.features.scattering import ac_intervals, run_scattering

logger = logging.getLogger(__name__)

PROFILE_ROWS = 64


@dataclass(frozen=True, slots=True, eq=False)
class EvolutionStudy:
    """The three runs of one evolve invocation and their metrics."""

    raw: EvolutionResult
    eigenvector: EvolutionResult
    ac: EvolutionResult | None
    metrics: dict[str, Any]
    distance: list[float] | None = None


def oscillation_check(result: EvolutionResult, initial: InitialData) -> dict[str, Any]:
    """FFT line of an eigenvector run against sqrt(lambda) / 2pi, within one bin."""
    peak = damping_report(result)["fft"]
    lam = float(initial.meta.get("eigenvalue", math.nan))
    expected = math.sqrt(lam) / (2.0 * math.pi) if lam > 0 else math.nan
    return {
        "expected_frequency": expected,
        "frequency": peak["frequency"],
        "bin_width": peak["bin_width"],
        "within_one_bin": bool(abs(peak["frequency"] - expected) <= peak["bin_width"]),
    }


def evolution_study(
    cfg: RunConfig,
    grid: ModeGrid,
    *,
    located: tuple[ScanResult, list[ExceptionalPoint]] | None = None,
    token: CancelToken | None = None,
) -> EvolutionStudy:
    """Evolve the configured data, its a.c. projection and an eigenvector on one grid."""
    B = build_B(grid)
    A, system = build_A(grid, B=B, coupling=cfg.coupling)
    scan, exceptional = located or locate_exceptional(cfg, grid, token=token)
    intervals = [(lo, hi) for _, lo, hi in ac_intervals(grid, exceptional, edge_margin=cfg.edge_margin)]
    times = np.linspace(0.0, cfg.horizon, cfg.time_steps)

    raw = make_initial_data(
        cfg.initial_data,
        grid,
        system,
        intervals,
        candidates=scan.candidates(),
        bump_mode=cfg.bump_mode,
        bump_center=cfg.bump_center,
        bump_width=cfg.bump_width,
        seed=cfg.seed,
        x_points=cfg.x_points,
    )
    raw_run = run_evolution(grid, system, raw, times, x_points=cfg.x_points)
    eig = eigenvector_data(grid, system, x_grid(grid, cfg.x_points))
    eig_run = run_evolution(grid, system, eig, times, x_points=cfg.x_points)

    metrics: dict[str, Any] = {
        "initial_data": cfg.initial_data,
        "spectrum": system.counts(),
        "eigenvector": {
            **damping_report(eig_run),
            **eig.meta,
            "oscillation": oscillation_check(eig_run, eig),
        },
        "unprojected": damping_report(raw_run),
    }

    try:
        ac = ac_projected(raw, system, intervals)
    except DomainError:
        logger.warning("initial data %s has no a.c. part", raw.kind, extra={"event": "no_ac_part"})
        return EvolutionStudy(raw=raw_run, eigenvector=eig_run, ac=None, metrics=metrics)

    ac_run = run_evolution(grid, system, ac, times, x_points=cfg.x_points)
    waves = run_scattering(
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
    ).waves
    flow = free_flow_comparison(ac_run, ac, grid.beta_flat, waves)
    metrics["ac"] = damping_report(ac_run, reference=raw_run)
    metrics["free_flow"] = {k: v for k, v in flow.items() if k != "distance"}
    return EvolutionStudy(
        raw=raw_run, eigenvector=eig_run, ac=ac_run, metrics=metrics, distance=flow["distance"]
    )


class EvolveUseCase:
    def execute(self, cfg: RunConfig) -> CommandResult:
        ctx = open_run(cfg, "evolve")
        grid = build_stack(cfg).require_grid()
        study = evolution_study(cfg, grid, token=ctx.token)

        artifacts = {
            "series_eigenvector": save_series_csv(
                study.eigenvector, ctx.path("evolution_eigenvector.csv")
            ),
            "series_raw": save_series_csv(study.raw, ctx.path(f"evolution_{study.raw.label}.csv")),
        }
        if study.ac is not None:
            artifacts["series_ac"] = save_series_csv(
                study.ac, ctx.path(f"evolution_{study.ac.label}.csv"), distance=study.distance
            )
        stride = max(1, cfg.time_steps // PROFILE_ROWS)
        for result in (study.raw, study.ac):
            if result is not None:
                artifacts[f"profiles_{result.label}"] = save_profiles_csv(
                    result, ctx.path(f"profiles_{result.label}.csv"), stride=stride
                )
        artifacts["metrics"] = save_metrics(study.metrics, ctx.path("metrics.json"))

        summary = {
            "eigenvector_late_ratio": study.metrics["eigenvector"]["late_ratio"],
            "ac_late_ratio": study.metrics.get("ac", {}).get("late_ratio"),
            "free_flow_ratio": study.metrics.get("free_flow", {}).get("ratio"),
        }
        return close_run(ctx, artifacts, summary)
