from .boundary import (
    birman_schwinger_eigenvalues,
    boundary_BR0,
    boundary_holder_report,
    boundary_kernel,
    check_edge_margin,
    coupling_sweep,
    default_gamma_range,
    epsilon_sweep,
    exceptional_set,
    moment_adjoint,
    scan_embedded,
    singular_value_report,
)
from .domain import (
    Candidate,
    EigenSystem,
    ExceptionalPoint,
    ModeGrid,
    OperatorMatrix,
    ScanPoint,
    ScanResult,
    mode_functions,
)
from .service import (
    apply_B_composed,
    build_A,
    build_A0,
    build_B,
    build_mode_grid,
    classify_spectrum,
    fine_profile_moment,
    kernel_form_defect,
    moment_matrix,
    positivity_report,
    project_modes,
    resolvent_apply,
    resolvent_kernel_apply,
    second_resolvent_residual,
    synthesize,
    velocity_moment,
)

__all__ = [
    "Candidate",
    "EigenSystem",
    "ExceptionalPoint",
    "ModeGrid",
    "OperatorMatrix",
    "ScanPoint",
    "ScanResult",
    "apply_B_composed",
    "birman_schwinger_eigenvalues",
    "boundary_BR0",
    "boundary_holder_report",
    "boundary_kernel",
    "build_A",
    "build_A0",
    "build_B",
    "build_mode_grid",
    "check_edge_margin",
    "classify_spectrum",
    "coupling_sweep",
    "default_gamma_range",
    "epsilon_sweep",
    "exceptional_set",
    "fine_profile_moment",
    "kernel_form_defect",
    "mode_functions",
    "moment_adjoint",
    "moment_matrix",
    "positivity_report",
    "project_modes",
    "resolvent_apply",
    "resolvent_kernel_apply",
    "scan_embedded",
    "second_resolvent_residual",
    "singular_value_report",
    "synthesize",
    "velocity_moment",
]
