from pathlib import Path


# =============================
# Project paths
# =============================

PROJECT_ROOT = Path(__file__).resolve().parents[1]

DATA_DIR = PROJECT_ROOT / "data"

# Built-in corpus (plain-text records, see shared/registry.py)
CORPUS_FILE = DATA_DIR / "corpus.txt"

LOGS_DIR = PROJECT_ROOT / "logs"
LOG_FILE = LOGS_DIR / "app.log"


# =============================
# Environment
# =============================

# Overrides --seed when set
SEED_ENV_VAR = "STRICT_EPI_SEED"

# Console log level (file handler always logs INFO)
LOG_LEVEL_ENV_VAR = "STRICT_EPI_LOG_LEVEL"
DEFAULT_CONSOLE_LOG_LEVEL = "WARNING"


# =============================
# Geometry tolerances
# =============================

TOL_RANK = 1e-9      # relative to the largest singular value
TOL_AFF = 1e-7       # absolute residual for affine membership
TOL_ORTH = 1e-10     # orthonormality of hull bases

# Relative-interior probing
R_PROBE = 1e-4
PROBE_LADDER = (1e-4, 1e-6, 1e-8)
RANDOM_PROBE_DIRECTIONS = 32

# Line-slice search
SLICE_SCAN_STEPS = 64
BISECTION_STEPS = 60


# =============================
# Function-model tolerances
# =============================

TOL_STRICT = 1e-10   # strict constraint satisfaction, epigraph graph band
MAX_VARIABLES = 12
MIN_ACCEPTANCE_RATE = 1e-4
MIN_DRAWS_BEFORE_GIVING_UP = 20_000


# =============================
# Convexity-analysis tolerances
# =============================

TOL_EQ = 1e-9        # near-equality of chords (relative to max(1, |f|))
TOL_SC = 1e-9        # strictness gap coefficient: tol_sc * t(1-t)|x-y|^2
TOL_PSD = 1e-9       # Hessian eigenvalue slack (relative to max(1, |lambda_max|))

STRICT_CONVEXITY_PARAMS = (0.25, 0.5, 0.75)
DOMAIN_CONVEXITY_PARAMS = (1 / 6, 2 / 6, 3 / 6, 4 / 6, 5 / 6)
COLLINEAR_PROBES = 5

CONTINUITY_RADII = (1e-2, 1e-4, 1e-6)
CONTINUITY_BALL_POINTS = 8
CONTINUITY_RATIO = 0.5
JUMP_GRID = 64
JUMP_HALVINGS = 40
JUMP_SEGMENTS = 32
JUMP_REFINED_SEGMENTS = 3

# Line restrictions
LINE_GRID = 17
LINE_RANDOM_PAIRS = 64
LINE_MEMBER_SCAN = 513

BLOWUP_THRESHOLD = 1e6
BLOWUP_GROWTH = 2.0
BLOWUP_CONTRACTION = 0.5
APPROACH_DISTANCES = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
MIN_LADDER_RUNGS = 3

# Jensen and convex-hull-bound probes
JENSEN_TRIALS = 100
JENSEN_MAX_POINTS = 5

EPI_INTERIOR_DROPS = (1e-2, 1e-4, 1e-6)
USC_HEIGHTS = (1e-1, 1e-2, 1e-3)

# Closure proxies for the epigraph oracle
HEIGHT_CAP = 1e3
GRAPH_OFFSETS = (0.0, 0.5, 2.0)
COLUMN_OFFSETS = (0.0, 1.0)
# interior points that replay walks from towards a claimed boundary point
REPLAY_REFERENCE_POINTS = 8

# Minimum pair separation, as a fraction of the sampled diameter
MIN_PAIR_SEPARATION = 0.05
BODY_PAIR_SEPARATION = 0.01


# =============================
# CLI / engine defaults
# =============================

DEFAULT_SAMPLES = 1000
DEFAULT_LINES = 64
DEFAULT_TRIALS = 2000
DEFAULT_BODY_TRIALS = 500
DEFAULT_PLANES = 16
DEFAULT_SEED = 42
DEFAULT_MODE = "all"

MODES = ("main-theorem", "oracle", "lines", "all")


# =============================
# Exit codes
# =============================

EXIT_CERTIFIED = 0
EXIT_REFUTED = 1
EXIT_INCONCLUSIVE = 2
EXIT_INPUT_ERROR = 3
