"""
File containing the string variables for config sections / keys and the numerical defaults
"""

# Config sections
MODEL = "model"
INITIAL = "initial"
INITIAL_PLUS = "initial.plus"
RUN = "run"
GRID = "grid"
TOLERANCES = "tolerances"

SECTIONS = (MODEL, INITIAL, INITIAL_PLUS, RUN, GRID, TOLERANCES)

# Modes
PLUS = "plus"
MINUS = "minus"
REFERENCE = "reference"

# Run kinds
ADIABATIC = "adiabatic"
CROSSING_SINGLE = "crossing-single"
CROSSING_PAIR = "crossing-pair"
LZ_TABLE = "lz-table"
CLASSICAL_ONLY = "classical-only"

# Built-in models
LINEAR_ISOTROPIC = "linear-isotropic"
TILTED = "tilted"
POLYNOMIAL = "polynomial"

# Layer bookkeeping
DELTA_EXPONENT = 5.0 / 14.0
BETA = 1.0 / 50.0

# Tolerances of the potential module
TOL_GAP = 1e-10
TOL_NONDEG = 1e-8
TOL_RANK = 1e-8

# Tolerances of the classical module
TOL_ODE = 1e-10
ATOL_ODE = 1e-12
TOL_CROSS = 1e-8
TOL_GRAZE = 1e-3
H_RESTART = 1e-6

# Tolerances of the transport module
TOL_TRANSPORT = 1e-12
ATOL_TRANSPORT = 1e-14
H_LIMIT = 1e-4
TOL_EIGEN = 1e-8
TOL_LIMIT = 1e-6

# Profile defaults
PROFILE_POINTS = 256
PROFILE_EXTENT = 12.0
PROFILE_DT = 1e-3
TAU_SWITCH = 0.05
H_EXTRACT = 1e-4
SHELL_FRACTION = 0.1
TOL_SHELL = 1e-8

# Landau-Zener defaults
TOL_LZ = 1e-12
B_SERIES_BELOW = 1e-4

# Physical grid / reference solver defaults
PHYSICAL_POINTS = 512
PHYSICAL_EXTENT = 2.0
DT_FRACTION = 1.0 / 20.0
TOL_MEET = 1e-6

# Report / output names
REPORT_NAME = "report"
PROFILE_TRACE_CSV = "profile_trace"
TRAJECTORY_CSV = "trajectory"
EIGENFRAME_CSV = "eigenframe"
LZ_CSV = "lz_scatter"
SUMMARY_CSV = "summary"
ERRORS_CSV = "errors"
CONVERGENCE_CSV = "convergence"
PROFILE_CSV = "profile_checks"

# Tracking
MLRUNS_FOLDER = "mlruns"
DEFAULT_EXPERIMENT_NAME = "Default-Pyconic"

# Commands
SIMULATE = "simulate"
SWEEP = "sweep"
CLASSICAL = "classical"
LZ_SCATTER = "lz-scatter"
PROFILE_TEST = "profile-test"

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")
DEFAULT_OUT = "pyconic-out"

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

# Landau-Zener tables
ETA2_GRID = (-4.0, 4.0, 1e-3)
ORACLE_ETA2 = (0.5, 1.0, 2.0)
ORACLE_S0 = 200.0
TOL_MASS_BOOKKEEPING = 1e-8
# relative agreement of reference and predicted mode masses after a crossing, modes below MIN_PREDICTED_MASS skipped
TOL_PREDICTED_MASS = 0.05
MIN_PREDICTED_MASS = 1e-3
MIN_SWEEP = 3
