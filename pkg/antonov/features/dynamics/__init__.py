from .domain import INITIAL_KINDS, EvolutionResult, InitialData
from .service import (
    ac_projected,
    bump_data,
    cesaro_means,
    damping_report,
    eigenvector_data,
    evolve,
    fft_peak,
    force,
    force_norm,
    force_singular_values,
    free_flow_comparison,
    make_initial_data,
    potential,
    project_ac,
    propagator_identity_residual,
    quasi_mode_data,
    random_ac_data,
    recurrence_horizon,
    run_evolution,
    x_grid,
)

__all__ = [
    "INITIAL_KINDS",
    "EvolutionResult",
    "InitialData",
    "ac_projected",
    "bump_data",
    "cesaro_means",
    "damping_report",
    "eigenvector_data",
    "evolve",
    "fft_peak",
    "force",
    "force_norm",
    "force_singular_values",
    "free_flow_comparison",
    "make_initial_data",
    "potential",
    "project_ac",
    "propagator_identity_residual",
    "quasi_mode_data",
    "random_ac_data",
    "recurrence_horizon",
    "run_evolution",
    "x_grid",
]
