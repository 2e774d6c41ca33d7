"""Project paths and numerical defaults.

Grid sizes and tolerances below are the defaults of ``RunConfig``; every one of
them can be overridden from a config file or the command line.
"""

from pathlib import Path

# Base paths
PROJECT_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_OUTPUT_DIR = PROJECT_ROOT / "runs"
DEFAULT_CACHE_DIR = PROJECT_ROOT / ".cache" / "steady"

# Steady state
DEFAULT_PROFILE = "polytrope"
DEFAULT_POLYTROPE_K = 1.0
DEFAULT_DEPTH = 1.0
DEFAULT_TOL = 1e-10
DEFAULT_H_MIN = 1e-6
DEFAULT_H_MAX = 50.0
DEFAULT_MAX_RADIUS = 1e3
DEFAULT_STATE_NODES = 4097

# Action-angle chart
DEFAULT_QUAD_TOL = 1e-10
DEFAULT_CHART_SIZE = 65
DEFAULT_THETA_TABLE = 513
DEFAULT_MIN_CHEB_DEGREE = 31
DEFAULT_MAX_CHEB_DEGREE = 511
DEFAULT_EMIN_CUTOFF = 1e-6  # relative to E0 - Emin; T' below this reports the asymptote

# Mode grid / operators
DEFAULT_LMAX = 6
DEFAULT_N_ENERGY = 128
DEFAULT_N_BETA = 256
DEFAULT_FINE_FACTOR = 4
DEFAULT_N_X = 256
DEFAULT_N_THETA = 64
DEFAULT_DELTA_LO = 1e-4
DEFAULT_DELTA_HI = 1e-4
DEFAULT_EDGE_MARGIN = 1e-3  # relative to beta_{1,min}
DEFAULT_R_EXCL = 2.0  # in grid spacings of beta
DEFAULT_GAMMA_POINTS = 400
DEFAULT_CANDIDATE_THRESHOLD = 1e-2
DEFAULT_REFINE_FACTOR = 10
DEFAULT_COUPLING = 1.0
DEFAULT_COND_MAX = 1e8
DEFAULT_UNRESOLVED_SPACINGS = 10.0

# Dynamics
DEFAULT_HORIZON = 200.0
DEFAULT_TIME_STEPS = 1024
DEFAULT_X_POINTS = 401
DEFAULT_INITIAL_DATA = "bump"

# Concurrency
DEFAULT_MAX_WORKERS = 4

# Acceptance thresholds
ACCEPT_IDENTITY_TOL = 1e-6
ACCEPT_POISSON_TOL = 1e-8
ACCEPT_PERIOD_TOL = 1e-8
ACCEPT_PERIOD_LIMIT_TOL = 1e-3
ACCEPT_DERIVATIVE_TOL = 1e-4
ACCEPT_SCATTERING_TOL = 1e-2
ACCEPT_FREE_CASE_TOL = 1e-10
ACCEPT_DAMPED_RATIO = 0.2
ACCEPT_OSCILLATING_RATIO = 0.9
