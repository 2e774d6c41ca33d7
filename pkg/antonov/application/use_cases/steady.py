"""Use case: solve (or load) the steady state and tabulate its action-angle chart."""

from __future__ import annotations

from antonov.application.use_cases.common import CommandResult, build_stack, close_run, open_run
from antonov.core.tables import write_json
from antonov.domain.run_config import RunConfig
from antonov.features.action_angle import angle_holder_report, period_limit_extrapolated
from antonov.features.action_angle.repository import save_chart_csv
from antonov.features.steady_state import SteadyState, steady_state_report


class SteadyUseCase:
    def execute(self, cfg: RunConfig) -> CommandResult:
        ctx = open_run(cfg, "steady")
        stack = build_stack(cfg, with_grid=False)
        state, chart = stack.state, stack.chart

        report = {
            "cache_hit": stack.cache_hit,
            "chart": chart.summary(),
            "holder": angle_holder_report(chart),
        }
        if isinstance(state, SteadyState):
            report["identities"] = steady_state_report(state)
            limit = state.period_limit()
            extrapolated = period_limit_extrapolated(state, tol=cfg.quad_tol)
            report["period_limit"] = {
                "sqrt_pi_over_rho0": limit,
                "extrapolated": extrapolated,
                "relative_defect": abs(extrapolated - limit) / limit,
            }

        artifacts = {
            "steady": write_json(ctx.path("steady.json"), state.to_dict()),
            "chart": save_chart_csv(chart, ctx.path("chart.csv")),
            "report": write_json(ctx.path("steady_report.json"), report),
        }
        summary = {
            "R0": state.R0,
            "M0": state.M0,
            "E0": state.E0,
            "Emin": state.Emin,
            "T_Emin": chart.period_bottom,
            "T_E0": chart.period_top,
            "cache_hit": stack.cache_hit,
        }
        return close_run(ctx, artifacts, summary)
