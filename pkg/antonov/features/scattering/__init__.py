from .domain import BetaRule, ResidualTable, ScatteringResult, SpectralMap, WaveOperators
from .service import (
    ac_intervals,
    ac_projector,
    beta_rule,
    build_free_map,
    build_perturbed_maps,
    change_of_variables_check,
    free_projector,
    free_row,
    inside_intervals,
    refinement_table,
    run_scattering,
    scattering_residuals,
    smooth_subspace,
    stationary_wave_operators,
    time_dependent_check,
)

__all__ = [
    "BetaRule",
    "ResidualTable",
    "ScatteringResult",
    "SpectralMap",
    "WaveOperators",
    "ac_intervals",
    "ac_projector",
    "beta_rule",
    "build_free_map",
    "build_perturbed_maps",
    "change_of_variables_check",
    "free_projector",
    "free_row",
    "inside_intervals",
    "refinement_table",
    "run_scattering",
    "scattering_residuals",
    "smooth_subspace",
    "stationary_wave_operators",
    "time_dependent_check",
]
