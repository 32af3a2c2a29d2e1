# const.py
"""Constants for the randomized (S,T)-GSVD toolkit."""

PACKAGE = "stgsvd"
VERSION = "1.0.0"
RESULTS_SCHEMA = "stgsvd.results/1"

# Configuration keys
CONF_EXPERIMENT = "experiment"
CONF_MATRICES = "matrices"
CONF_MATRIX_FILE = "matrix_file"
CONF_WEIGHT_FILES = "weight_files"
CONF_N = "n"
CONF_KAPPA = "kappa"
CONF_KAPPA_LIST = "kappa_list"
CONF_K_GRID = "k_grid"
CONF_OVERSAMPLING = "oversampling"
CONF_Q_LIST = "q_list"
CONF_SEEDS = "seeds"
CONF_DELTA = "delta"
CONF_METHODS = "methods"
CONF_REL_TOL_LIST = "rel_tol_list"
CONF_PRECONDITIONER = "preconditioner"
CONF_DROP_TOL = "drop_tol"
CONF_WEIGHT_SEED = "weight_seed"
CONF_WORKERS = "workers"
CONF_TIMINGS = "timings"
CONF_FORMAT = "format"
CONF_OUT = "out"

# Defaults
DEFAULT_OVERSAMPLING = 10
SAFE_OVERSAMPLING = 20  # conservative p for Gaussian sketches
DEFAULT_SUBSPACE_ITERATIONS = 0
DEFAULT_DELTA = 0.1
DEFAULT_RETRY_COUNT = 3
DEFAULT_N = 128
DEFAULT_LOWRANK = 15
DEFAULT_GAP = 10.0
DEFAULT_NOISE_LEVEL = 1e-2
DEFAULT_DECAY_EXPONENT = 1.0
DEFAULT_DECAY_BASE = 0.9
DEFAULT_DENSITY = 0.025
DEFAULT_KAPPA = 1e4
DEFAULT_PRECOND_KAPPA = 1e6
DEFAULT_KAPPA_LIST = [10.0, 1e4, 1e7, 1e10]
DEFAULT_K_GRID = [10, 20, 30, 40, 50, 60]
DEFAULT_Q_LIST = [0, 1, 2]
DEFAULT_SEEDS = list(range(20))
DEFAULT_REL_TOL_LIST = [1e-3, 1e-6, 1e-9]
DEFAULT_DROP_TOL = 1e-4
DEFAULT_RANDSVD_MODE = 5
DEFAULT_WEIGHT_SEED = 2024
DEFAULT_FORMAT = "csv"

# Numerical tolerances
SYMMETRY_TOL = 1e-12  # relative Frobenius asymmetry accepted for SPD input
REFINE_THRESHOLD = 1e-8  # estimated W-orthogonality loss that triggers refinement
PINV_RTOL = 1e-12  # singular value cutoff relative to s_1
RANK_RTOL = 1e-12
NEGATIVE_EIG_TOL = 1e-10  # relative to lambda_1
NEGATIVE_RADICAND_TOL = 1e-14  # relative to max(1, x^T x)
BOUND_SLACK = 1e-9  # relative to sigma_1
SANDWICH_SLACK = 1e-12
ORACLE_MAX_DIM = 2000
ICHOL_INITIAL_SHIFT = 1e-3
INCOMPLETE_CHOLESKY_RETRIES = 6
CSV_FLOAT_FORMAT = ".17g"

# Random number generation
RNG_NAME = "numpy.random.Philox"
NORMAL_TRANSFORM = "ziggurat"
TWO_SIDED_SEED_XOR = 0x5DEECE66D  # derives the second sketch's seed

# Samplers
SAMPLER_GAUSSIAN = "gaussian"
SAMPLER_PRECONDITIONED = "preconditioned"
SUPPORTED_SAMPLERS = [
    SAMPLER_GAUSSIAN,
    SAMPLER_PRECONDITIONED,
]

# Preconditioners
PRECOND_EXACT = "exact"
PRECOND_JACOBI = "jacobi"
PRECOND_ICHOL = "ichol"
SUPPORTED_PRECONDITIONERS = [
    PRECOND_EXACT,
    PRECOND_JACOBI,
    PRECOND_ICHOL,
]

# Methods
METHOD_GSVD = "gsvd"
METHOD_GSVD_TRANSPOSE = "gsvd-transpose"
METHOD_TWO_SIDED = "twosided"
METHOD_GENEIG = "geneig"
SUPPORTED_METHODS = [
    METHOD_GSVD,
    METHOD_GSVD_TRANSPOSE,
    METHOD_TWO_SIDED,
    METHOD_GENEIG,
]
# Experiment labels; "gsvd-q<N>" pins the subspace iteration count
DEFAULT_COMPARISON_METHODS = ["gsvd-q0", "gsvd-q1", METHOD_GENEIG, METHOD_TWO_SIDED]

# Test matrices
MATRIX_CONTROLLED_GAP = "controlled_gap"
MATRIX_LOWRANK_NOISE = "lowrank_noise"
MATRIX_LOWRANK_DECAY = "lowrank_decay"
MATRIX_DECAY = "decay"
SUPPORTED_MATRICES = [
    MATRIX_CONTROLLED_GAP,
    MATRIX_LOWRANK_NOISE,
    MATRIX_LOWRANK_DECAY,
    MATRIX_DECAY,
]

# Experiments
EXPERIMENT_ACCURACY_VS_K = "accuracy_vs_k"
EXPERIMENT_METHOD_COMPARISON = "method_comparison"
EXPERIMENT_SV_AND_ANGLES = "sv_and_angles"
EXPERIMENT_CONDITION_SWEEP = "condition_sweep"
EXPERIMENT_PRECONDITIONER = "preconditioner"
EXPERIMENT_INEXACTNESS = "inexactness"
EXPERIMENT_BOUNDS_AUDIT = "bounds_audit"
EXPERIMENT_SENSITIVITY = "sensitivity"
SUPPORTED_EXPERIMENTS = [
    EXPERIMENT_ACCURACY_VS_K,
    EXPERIMENT_METHOD_COMPARISON,
    EXPERIMENT_SV_AND_ANGLES,
    EXPERIMENT_CONDITION_SWEEP,
    EXPERIMENT_PRECONDITIONER,
    EXPERIMENT_INEXACTNESS,
    EXPERIMENT_BOUNDS_AUDIT,
    EXPERIMENT_SENSITIVITY,
]

# Output formats
FORMAT_CSV = "csv"
FORMAT_JSON = "json"
SUPPORTED_FORMATS = [FORMAT_CSV, FORMAT_JSON]

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
