import os

APP_NAME = "noetherq"
APP_VERSION = "0.1.0"

DEBUG = os.getenv("NOETHERQ_DEBUG", "false").lower() in ("true", "1", "yes")

# API settings
API_HOST = os.getenv("NOETHERQ_API_HOST", "127.0.0.1")
API_PORT = int(os.getenv("NOETHERQ_API_PORT", 8005))
API_KEY = os.getenv("NOETHERQ_API_KEY")  # required by the HTTP front door

# Finished runs are kept this long (seconds) by the in-memory report store
RUN_RESULT_TTL = int(os.getenv("NOETHERQ_RUN_RESULT_TTL", 3600))

# Output settings
OUT_DIR = os.getenv("NOETHERQ_OUT", "out")
DEFAULT_SEED = int(os.getenv("NOETHERQ_SEED", 20240517))

# Naming conventions for derived symbols
VELOCITY_SUFFIX = "d"
ACCELERATION_SUFFIX = "dd"
MOMENTUM_PREFIX = "p_"
TIME_COORDINATE = "q0"
TIME_MOMENTUM = "p0"

# Determining-equation solver
SAMPLES_PER_UNKNOWN = int(os.getenv("NOETHERQ_SAMPLES_PER_UNKNOWN", 20))
SAMPLE_BOX_COORDINATES = (-2.0, 2.0)
SAMPLE_BOX_TIME = (0.0, 2.0)
NULLSPACE_RTOL = float(os.getenv("NOETHERQ_NULLSPACE_RTOL", 1e-10))
# singular values within this many decades of the threshold make the rank ambiguous
RANK_GAP_DECADES = 3.0
# fallback when the exact determining equations reject a null vector
RATIONAL_MAX_DENOMINATOR = 64
RATIONAL_WIDER_DENOMINATORS = (1000, 10**6)
RATIONAL_TOLERANCE = 1e-9

# Classical verification
DRIFT_TOLERANCE = float(os.getenv("NOETHERQ_DRIFT_TOLERANCE", 1e-7))
DRIFT_FLOOR = 1e-300

# Quantum grid defaults (half width in units of sqrt(hbar / (m * omega)))
GRID_POINTS = int(os.getenv("NOETHERQ_GRID_POINTS", 2048))
GRID_HALF_WIDTH = float(os.getenv("NOETHERQ_GRID_HALF_WIDTH", 12.0))
STENCIL_ORDER = int(os.getenv("NOETHERQ_STENCIL_ORDER", 4))  # Options: 2, 4
NORM_DEFICIT_WARNING = 1e-6
RAYLEIGH_IMAG_TOLERANCE = 1e-10
# |q − (n + ½)ħω| is compared against this multiple of ħω
EIGENVALUE_TOLERANCE = float(os.getenv("NOETHERQ_EIGENVALUE_TOLERANCE", 1e-5))
RESIDUAL_TOLERANCE = float(os.getenv("NOETHERQ_RESIDUAL_TOLERANCE", 1e-4))
TDSE_TIME_STEP = 1e-5

# Crank-Nicolson cross-check of verify-quantum
CN_TIME_STEP = float(os.getenv("NOETHERQ_CN_TIME_STEP", 1e-4))
CN_SPAN = 1.0
CN_ERROR_TOLERANCE = 1e-3
CN_NORM_DRIFT = 1e-10  # per 1000 steps
CN_RAYLEIGH_DRIFT = 1e-6

# Logging settings
LOG_LEVEL = os.getenv("NOETHERQ_LOG_LEVEL", "INFO")
LOG_FORMAT = os.getenv(
    "NOETHERQ_LOG_FORMAT", "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
)
