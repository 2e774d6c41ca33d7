from .domain import ActionAngleChart, OrbitTable
from .service import (
    angle,
    angle_holder_report,
    build_chart,
    chart_from_rows,
    chart_point,
    orbit_table,
    period,
    period_derivative,
    period_limit_extrapolated,
    period_tanh_sinh,
    turning_point,
)

__all__ = [
    "ActionAngleChart",
    "OrbitTable",
    "angle",
    "angle_holder_report",
    "build_chart",
    "chart_from_rows",
    "chart_point",
    "orbit_table",
    "period",
    "period_derivative",
    "period_limit_extrapolated",
    "period_tanh_sinh",
    "turning_point",
]
