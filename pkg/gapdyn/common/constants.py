# Copyright (c) gapdyn developers. All rights reserved.
# Licensed under the MIT License.

# Tolerances
DEFAULT_MEMBERSHIP_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-9
DEFAULT_FEASIBILITY_TOL = 1e-9
DEFAULT_STEP_TOL = 1e-8
DEFAULT_ENERGY_SLACK_RATE = 1e-6

# Finite differences
DEFAULT_FD_STEP = 1e-5
DEFAULT_FD_RTOL = 1e-6

# Numerical conjugate
DEFAULT_CONJUGATE_CAP = 1e12
DEFAULT_CONJUGATE_GRID = (-10.0, 10.0)
DEFAULT_CONJUGATE_SAMPLES = 4001

# Brute force oracle
DEFAULT_ORACLE_GRID = (-5.0, 5.0)
DEFAULT_ORACLE_POINTS = 401
MAX_ORACLE_COORDINATES = 3

# Fixed point solves
DEFAULT_MAX_ITER = 100
DEFAULT_FP_TOL = 1e-12

# n-monotonicity sampling
DEFAULT_EXHAUSTIVE_LIMIT = 200000
DEFAULT_MONOTONE_SAMPLES = 20000

# Trajectory column names
DEFAULT_TIME_COL = "t"
DEFAULT_ENERGY_COL = "H"
DEFAULT_RESIDUAL_COL = "I_residual"
LAYOUT_COORDINATES = {
    "plain": (("q",), ("p",)),
    "internal": (("q", "q_I"), ("p", "p_I")),
    "damage": (("q", "d"), ("p", "r")),
}

# Output files
TRAJECTORY_FILE = "trajectory.csv"
LEDGER_FILE = "ledger.csv"
HYSTERESIS_FILE = "hysteresis.csv"
AUDIT_FILE = "audit.json"
METADATA_FILE = "metadata.json"
CSV_FLOAT_FORMAT = "%.17g"
SCHEMA_VERSION = "1.0"

# Environment
SEED_ENV_VAR = "GAPDYN_SEED"

# Other
SEED = 42
