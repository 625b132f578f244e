"""Numerical constants, defaults and labels for the ARMA renormalization toolkit."""

from enum import StrEnum

# Stationarity: AR roots must satisfy |z| < 1 - RHO_TOL
RHO_TOL = 1e-12

# Burn-in for stationary simulation: 10x slowest AR timescale, capped
BURN_IN_FACTOR = 10
BURN_IN_CAP = 1_000_000

# MA spectral factorization (innovations algorithm as a banded Toeplitz Cholesky)
FACTOR_TOL = 1e-12
FACTOR_START = 64  # initial Toeplitz order per unit of q + 1
FACTOR_MAX_ORDER = 65_536

# Slack on alpha >= 2|beta| and on spectral-density positivity, relative to gamma_0
PSD_RTOL = 1e-12
PSD_GRID = 1024  # frequency points for the banded Toeplitz PSD check

# RG flow on Taylor-coefficient space
DEFAULT_K = 3  # last order where fixed-point free parameters appear
TABULATED_K = 3  # classes C and D are only known through this order
OVERFLOW_GUARD = 1e12  # any coefficient above this marks the orbit divergent
CLASSIFY_TOL = 1e-9  # normalized sup-change between successive iterates
CLASSIFY_STABLE_STEPS = 3  # consecutive steps below CLASSIFY_TOL
CLASSIFY_MAX_ITER = 200
TEMPLATE_TOL = 1e-6  # residual against the matched fixed-point template
BOUNDARY_TOL = 1e-12  # order-0 point counted as on the basin triangle edge

# 2x2 matrix exponential and transition covariance
DEG_TOL = 1e-7  # eigenvalue gap below which the confluent formulas are used
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12
QUAD_LIMIT = 200
SAMPLING_NODE_TOL = 1e-14  # |(e^{A tau})_12| relative to ||e^{A tau}|| below this is a node

# Estimators
MIN_EULER_LENGTH = 10
MIN_ARMA21_LENGTH = 50
MLE_MAX_ITER = 2000
MLE_FATOL = 1e-10  # on the per-sample negative log-likelihood
MLE_XATOL = 1e-6  # in whitened units
MLE_RESTARTS = 1
HESSIAN_STEP = 1e-2  # in whitened units (one unit is about one standard error)
JACKKNIFE_BLOCKS = 20
SINGULAR_RTOL = 1e-20  # residual variance relative to the signal power; below is deterministic

# Nonlinear Euler simulation for the quartic experiment
QUARTIC_STABILITY = 1e-3  # tau_sim <= QUARTIC_STABILITY * min(1/eta, 1/sqrt(kappa_eff))
DEFAULT_SUBSAMPLE = 10
QUARTIC_CHUNK = 100_000  # observations per numba call
QUARTIC_BURN_IN_TIME = 10.0  # in units of 1/eta

# Effective AR(2): reconstructed-velocity damping rescaling
EULER_DAMPING_FACTOR = 2.0 / 3.0

# CLI
EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
DEFAULT_SEED = 0
DEFAULT_REPLICAS = 1
MANIFEST_SUFFIX = ".manifest.json"


class Scheme(StrEnum):
    """Provenance label of a time series."""

    EULER = "euler"
    EXACT = "exact"
    ARMA = "arma"
    EXTERNAL = "external"


class Likelihood(StrEnum):
    """Likelihood an estimate was obtained under."""

    EULER = "euler"
    ARMA21 = "arma21"
    EFFECTIVE = "effective"


class FixedPointClass(StrEnum):
    """Fixed points of the RG map on Taylor-coefficient space.

    A  = white noise
    B  = first-order Markov (AR(1) on the unit circle)
    C  = three-branched jump process
    D  = discretized, partially observed second-order SDE
    """

    A = "A"
    B = "B"
    C = "C"
    D = "D"


class Verdict(StrEnum):
    """Outcome of classifying an RG orbit."""

    A = "A"
    B = "B"
    C = "C"
    D = "D"
    DIVERGENT = "divergent"
    UNRESOLVED = "unresolved"


class OutputFormat(StrEnum):
    """File format for CLI artifacts."""

    CSV = "csv"
    JSON = "json"
