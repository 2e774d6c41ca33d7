"""Shared plumbing of the command use cases: run folders, manifests, the cached state
and the chart/bands/grid stack every command starts from."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from antonov.core.errors import DomainError, InfrastructureError
from antonov.core.observability.run_manifest import register_run
from antonov.core.parallel import CancelToken
from antonov.domain.run_config import RunConfig
from antonov.features.action_angle import ActionAngleChart, build_chart, chart_from_rows
from antonov.features.action_angle.repository import (
    CHART_COLUMNS,
    chart_cache_path,
    load_chart_rows,
    save_chart_csv,
)
from antonov.features.band_structure import BandStructure, build_bands
from antonov.features.band_structure.repository import BAND_COLUMNS
from antonov.features.dynamics.repository import SERIES_COLUMNS
from antonov.features.operators import (
    ExceptionalPoint,
    ModeGrid,
    ScanResult,
    build_mode_grid,
    default_gamma_range,
    exceptional_set,
    scan_embedded,
)
from antonov.features.operators.repository import SCAN_COLUMNS
from antonov.features.scattering.repository import ROW_COLUMNS
from antonov.features.steady_state import (
    AnsatzProfile,
    PotentialWell,
    SteadyState,
    harmonic_state,
    solve_for_mass,
    solve_steady_state,
)
from antonov.features.steady_state.repository import cache_path, load_state, save_state

logger = logging.getLogger(__name__)

SCHEMA_NAME = "schema.yaml"

CSV_SCHEMA: dict[str, list[str]] = {
    "chart.csv": list(CHART_COLUMNS),
    "bands.csv": list(BAND_COLUMNS),
    "gamma_scan.csv": list(SCAN_COLUMNS),
    "beta_rows.csv": list(ROW_COLUMNS),
    "evolution_<label>.csv": list(SERIES_COLUMNS) + ["distance (a.c. run only)"],
    "profiles_<label>.csv": ["t", "F(t, x_i) for every x_i named in the header"],
}


@dataclass(frozen=True, slots=True)
class RunContext:
    command: str
    cfg: RunConfig
    run_id: str
    out_dir: Path
    token: CancelToken = field(default_factory=CancelToken)

    def path(self, name: str) -> Path:
        return self.out_dir / name


@dataclass(frozen=True, slots=True)
class CommandResult:
    command: str
    run_dir: Path
    artifacts: dict[str, str]
    summary: dict[str, Any]


def open_run(cfg: RunConfig, command: str) -> RunContext:
    cfg.ensure_valid()
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")  # noqa: UP017
    run_id = f"{command}-{stamp}-{cfg.config_hash()[:8]}"
    out_dir = Path(cfg.output_dir) / command
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InfrastructureError(f"cannot create output folder {out_dir}", cause=e) from e
    logger.info("run %s -> %s", run_id, out_dir, extra={"event": "run_started", "run_id": run_id})
    return RunContext(command=command, cfg=cfg, run_id=run_id, out_dir=out_dir)


def close_run(ctx: RunContext, artifacts: dict[str, Path], summary: dict[str, Any]) -> CommandResult:
    """Write the CSV schema and the run manifest next to the outputs."""
    schema = ctx.path(SCHEMA_NAME)
    try:
        schema.write_text(yaml.safe_dump({"csv": CSV_SCHEMA}, sort_keys=False), encoding="utf-8")
    except OSError as e:
        raise InfrastructureError(f"cannot write {schema}", cause=e) from e
    files = {name: str(p) for name, p in artifacts.items()}
    files["schema"] = str(schema)
    spec = {**ctx.cfg.to_dict(), "tolerances": {"tol": ctx.cfg.tol, "quad_tol": ctx.cfg.quad_tol}}
    register_run(ctx.run_id, ctx.command, spec, files, run_dir=ctx.out_dir)
    logger.info("run %s finished", ctx.run_id, extra={"event": "run_finished", "run_id": ctx.run_id})
    return CommandResult(command=ctx.command, run_dir=ctx.out_dir, artifacts=files, summary=summary)


def profile_of(cfg: RunConfig) -> AnsatzProfile:
    return AnsatzProfile.king() if cfg.profile == "king" else AnsatzProfile.polytrope(cfg.k)


def load_or_solve_state(cfg: RunConfig) -> tuple[PotentialWell, bool]:
    """The configured steady state and whether it came from the cache."""
    if cfg.profile == "harmonic":
        return harmonic_state(cfg.omega, cfg.radius), False
    profile = profile_of(cfg)
    if cfg.mass is not None:
        state = solve_for_mass(
            profile,
            cfg.mass,
            tol=cfg.tol,
            h_range=(cfg.h_min, cfg.h_max),
            max_radius=cfg.max_radius,
            nodes=cfg.state_nodes,
        )
        save_state(state, cache_path(Path(cfg.cache_dir), profile, state.h, cfg.tol))
        return state, False
    assert cfg.depth is not None
    path = cache_path(Path(cfg.cache_dir), profile, cfg.depth, cfg.tol)
    cached = load_state(path)
    if cached is not None:
        logger.info("steady state cache hit %s", path.name, extra={"event": "cache_hit"})
        return cached, True
    state = solve_steady_state(
        profile, cfg.depth, tol=cfg.tol, max_radius=cfg.max_radius, nodes=cfg.state_nodes
    )
    save_state(state, path)
    return state, False


@dataclass(frozen=True, slots=True, eq=False)
class Stack:
    state: PotentialWell
    chart: ActionAngleChart
    bands: BandStructure
    grid: ModeGrid | None
    cache_hit: bool

    def require_grid(self) -> ModeGrid:
        assert self.grid is not None
        return self.grid


def _chart_cache(cfg: RunConfig, state: PotentialWell) -> Path | None:
    if not isinstance(state, SteadyState):
        return None
    state_path = cache_path(Path(cfg.cache_dir), profile_of(cfg), state.h, cfg.tol)
    return chart_cache_path(state_path, cfg.chart_size, cfg.quad_tol, cfg.theta_table)


def load_or_build_chart(cfg: RunConfig, state: PotentialWell, state_hit: bool) -> ActionAngleChart:
    """The stored chart when the state came from the cache, otherwise a fresh one saved for next time."""
    path = _chart_cache(cfg, state)
    if path is not None and state_hit:
        rows = load_chart_rows(path)
        if rows is not None and len(rows) == cfg.chart_size:
            try:
                chart = chart_from_rows(
                    state, rows, quad_tol=cfg.quad_tol, theta_table=cfg.theta_table
                )
            except DomainError:
                logger.warning("stored chart %s does not match the state", path.name, exc_info=True)
            else:
                logger.info("chart cache hit %s", path.name, extra={"event": "cache_hit"})
                return chart
    chart = build_chart(
        state,
        chart_size=cfg.chart_size,
        quad_tol=cfg.quad_tol,
        theta_table=cfg.theta_table,
        max_workers=cfg.max_workers,
    )
    if path is not None:
        save_chart_csv(chart, path)
    return chart


def build_stack(cfg: RunConfig, *, with_grid: bool = True, n_energy: int | None = None) -> Stack:
    state, hit = load_or_solve_state(cfg)
    chart = load_or_build_chart(cfg, state, hit)
    bands = build_bands(chart, cfg.lmax)
    grid = None
    if with_grid:
        grid = build_mode_grid(
            chart,
            bands,
            lmax=cfg.lmax,
            n_energy=n_energy or cfg.n_energy,
            fine_factor=cfg.fine_factor,
            n_x=cfg.n_x,
            n_theta=cfg.n_theta,
            delta_lo=cfg.delta_lo,
            delta_hi=cfg.delta_hi,
            max_workers=cfg.max_workers,
        )
    return Stack(state=state, chart=chart, bands=bands, grid=grid, cache_hit=hit)


def gamma_grid(cfg: RunConfig, grid: ModeGrid) -> np.ndarray:
    lo, hi = default_gamma_range(grid)
    lo = cfg.gamma_min if cfg.gamma_min is not None else lo
    hi = cfg.gamma_max if cfg.gamma_max is not None else hi
    return np.linspace(lo, hi, cfg.gamma_points)


def locate_exceptional(
    cfg: RunConfig, grid: ModeGrid, *, token: CancelToken | None = None
) -> tuple[ScanResult, list[ExceptionalPoint]]:
    """Birman-Schwinger scan over the configured gamma grid and the resulting exceptional set."""
    scan = scan_embedded(
        grid,
        gamma_grid(cfg, grid),
        coupling=cfg.coupling,
        threshold=cfg.candidate_threshold,
        refine_factor=cfg.refine_factor,
        edge_margin=cfg.edge_margin,
        max_workers=cfg.max_workers,
        token=token,
    )
    return scan, exceptional_set(grid, scan, r_excl=cfg.r_excl)
