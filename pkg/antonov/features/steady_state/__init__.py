from .domain import (
    AnsatzProfile,
    HarmonicWell,
    PotentialWell,
    ProfileKind,
    SteadyState,
    phi_prime_abs,
    rho_of_depth,
)
from .service import (
    harmonic_state,
    rho_of_depth_quadrature,
    solve_for_mass,
    solve_steady_state,
    steady_state_report,
)

__all__ = [
    "AnsatzProfile",
    "HarmonicWell",
    "PotentialWell",
    "ProfileKind",
    "SteadyState",
    "harmonic_state",
    "phi_prime_abs",
    "rho_of_depth",
    "rho_of_depth_quadrature",
    "solve_for_mass",
    "solve_steady_state",
    "steady_state_report",
]
