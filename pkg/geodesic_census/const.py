"""Constants for the geodesic census."""

from pathlib import Path
from typing import Final

TOOL_VERSION: Final = "1.0.0"

# Census cache file format
FORMAT_VERSION: Final = 1
CENSUS_SUFFIX: Final = ".census"
LENGTH_DIGITS: Final = 30
ERROR_DIGITS: Final = 6

# Precision of the matrix representation, in bits
DEFAULT_PRECISION: Final = 128
MIN_PRECISION: Final = 64

# Enumeration defaults
DEFAULT_WORD_LENGTH_BOUND: Final = 6
DEFAULT_SHARDS: Final = 1
DEFAULT_SAFETY_MARGIN: Final = 0.0

# Environment
ENV_CACHE_DIR: Final = "GEODESIC_CACHE_DIR"
DEFAULT_CACHE_DIR: Final = Path("~/.cache/geodesic_census")

# Representations
PRESET_BOLZA: Final = "bolza"
RELATOR_TOLERANCE: Final = "1e-20"
HYPERBOLICITY_CHECK_LENGTH: Final = 3

# Brute-force oracle
ORACLE_MAX_RADIUS: Final = 8

# Norm on homology, see homology_norm
NORM_SUM: Final = "sum"
NORM_MAX: Final = "max"
NORM_KINDS: Final = (NORM_SUM, NORM_MAX)

# Asymptotic model sources
MODEL_DEFAULT: Final = "default"
MODEL_FILE: Final = "file"
MODEL_EMPIRICAL: Final = "empirical"
MODEL_SOURCES: Final = (MODEL_DEFAULT, MODEL_FILE, MODEL_EMPIRICAL)
DET_TOLERANCE: Final = 1e-9
MIN_COVARIANCE_SAMPLES: Final = 100

# Pair queries assume x^k <= x_i <= x
DEFAULT_PAIR_K: Final = 0.5

# Diagnostics: dyadic cutoffs and ratio band of the pi/li trend, largest norm in the pair shape
TREND_POINTS: Final = 3
TREND_BAND: Final = (0.7, 1.4)
PAIR_SHAPE_RADIUS: Final = 2

# Output
OUTPUT_CSV: Final = "csv"
OUTPUT_JSON: Final = "json"
OUTPUT_FORMATS: Final = (OUTPUT_CSV, OUTPUT_JSON)

# Counting functions, as named in queries and report rows
FUNC_PI: Final = "pi"
FUNC_PI_BETA: Final = "pi_beta"
FUNC_PI_BETA_PS: Final = "pi_beta_ps"
FUNC_R_BETA: Final = "R_beta"
FUNC_PAIR: Final = "pair"
FUNC_R2: Final = "R2"
FUNC_P2: Final = "P2"
FUNC_R2_TRUNCATED: Final = "R2_truncated"
COMPARE_FUNCTIONS: Final = (
    FUNC_PI,
    FUNC_PI_BETA,
    FUNC_PI_BETA_PS,
    FUNC_R_BETA,
    FUNC_PAIR,
    FUNC_R2,
    FUNC_P2,
)
DEFAULT_COMPARE_FUNCTIONS: Final = (
    FUNC_PI,
    FUNC_PI_BETA,
    FUNC_R_BETA,
    FUNC_PAIR,
    FUNC_R2,
    FUNC_P2,
)

# Exit codes
EXIT_OK: Final = 0
EXIT_USER_ERROR: Final = 1
EXIT_INTERNAL_ERROR: Final = 2

# Report columns
REPORT_COLUMNS: Final = (
    "function",
    "beta",
    "x1",
    "x2",
    "observed",
    "predicted",
    "ratio",
    "complete",
)
COUNT_COLUMNS: Final = ("function", "beta", "x1", "x2", "value", "complete")

# Config keys
CONF_REPRESENTATION: Final = "representation"
CONF_PRECISION: Final = "precision"
CONF_WORD_LENGTH_BOUND: Final = "word_length_bound"
CONF_SHARDS: Final = "shards"
CONF_CACHE_DIR: Final = "cache_dir"
CONF_CACHE_FILE: Final = "cache_file"
CONF_MODEL_SOURCE: Final = "model_source"
CONF_MODEL_FILE: Final = "model_file"
CONF_OUTPUT_FORMAT: Final = "output_format"
CONF_INCLUDE_DIAGONAL: Final = "include_diagonal"
CONF_NORM_KIND: Final = "norm_kind"
CONF_SAFETY_MARGIN: Final = "safety_margin"
CONF_PAIR_K: Final = "pair_k"
CONF_STAMP: Final = "stamp"
