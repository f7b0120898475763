"""
Numerical constants, tolerances and lookup tables for the rank-correlation engine.
Every default that influences a computed value lives here so results are
reproducible from command-line flags alone.
"""

import math

# ===== QUASI-MONTE CARLO =====

DEFAULT_QMC_POINTS = 2 ** 14
DEFAULT_QMC_REPLICATES = 8
DEFAULT_QMC_SEED = 20240917
MIN_QMC_POINTS = 16
MIN_QMC_REPLICATES = 2

MAX_SOBOL_DIM = 8
SOBOL_BITS = 30  # integer resolution of base points and digital shifts

# ===== SPECIAL FUNCTIONS =====

GAUSS_LEGENDRE_NODES = 64  # Owen's T quadrature order
QUANTILE_CLIP = 1e-300  # keeps probability products away from exact 0 in the Genz recursion

# ===== CORRELATION MATRICES =====

PSD_TOLERANCE = 1e-10  # smallest eigenvalue allowed before a matrix is rejected
BOUNDARY_RHO = 1.0 - 1e-12  # |rho| = 1 is pulled in to this before factorization
CHOLESKY_PIVOT_FLOOR = 1e-14  # pivots below this are treated as exact zeros
CHOLESKY_NEGATIVE_TOL = 1e-8  # a Schur diagonal below -tol means the matrix is not PSD
MAX_ORTHANT_DIM = 5

# ===== ROOT FINDING =====

MAX_SOLVER_ITERATIONS = 200
SOLVER_TOL_FLOOR = 1e-6  # default tolerance is 10 x the integration error, never below this
SOLVER_TOL_ERROR_FACTOR = 10.0
SOLVER_XTOL = 1e-12

EQUI_SKEW_BRACKET = (0.0, 4.0)  # search range for the common skew level
EQUI_SKEW_PROBES = 9  # coarse grid used to locate sign changes of the residual
EQUI_SKEW_MAX_BISECTIONS = 60

# ===== SAMPLING ORACLE =====

MIN_ORACLE_BATCH_SIZE = 1000
MIN_ORACLE_BATCHES = 10
KENDALL_REFERENCE_MAX_N = 2000  # the O(n^2) cross-check is refused above this size

# ===== CLI =====

MIN_ESTIMATE_ROWS = 30
CSV_FLOAT_FORMAT = '%.17g'

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_NUMERIC_ERROR = 3
EXIT_NOT_ATTAINABLE = 4
EXIT_TIES = 5

# Shortcut families expand to (canonical family, mixing kind, needs nu, forces zero skew)
FAMILY_SHORTCUTS = {
    'gh-skew-t': {'family': 'mn', 'mixing': 'dof', 'zero_skew': False},
    'ac-skew-t': {'family': 'msn', 'mixing': 'dof', 'zero_skew': False},
    'skew-normal': {'family': 'msn', 'mixing': 'degenerate', 'zero_skew': False},
    'gaussian': {'family': 'mn', 'mixing': 'degenerate', 'zero_skew': True},
    'student-t': {'family': 'mn', 'mixing': 'dof', 'zero_skew': True},
}

CANONICAL_FAMILIES = ('mn', 'msn')

# ===== CURVE SWEEP PRESETS =====

# Each preset is a list of (family, nu, skew) curves evaluated over DEFAULT_SWEEP_GRID.
# nu is None for shortcuts that take no degrees of freedom.
DEFAULT_SWEEP_GRID = (-1.0, 1.0, 0.05)

_GH_GENERAL_SKEWS = [(0.0, 0.0), (1.0, -2.0), (1.0, -1.0), (1.0, 1.0), (1.0, 2.0)]
_AC_GENERAL_SKEWS = [(0.0, 0.0), (2.0, -5.0), (2.0, -1.0), (2.0, 1.0), (2.0, 5.0)]
_EQUI_LEVELS = [0.0, 0.5, 1.0, 2.0, 3.0]
_SINGLE_LEVELS = [0.0, 1.0, 2.0, 5.0]

SWEEP_PRESETS = {
    'elliptical-spearman': (
        [('gaussian', None, (0.0, 0.0))]
        + [('student-t', nu, (0.0, 0.0)) for nu in (1.0, 4.0)]
    ),
    'ghst-general': [('gh-skew-t', nu, s) for nu in (4.0, 10.0) for s in _GH_GENERAL_SKEWS],
    'ghst-equi': [('gh-skew-t', nu, (b, b)) for nu in (4.0, 10.0) for b in _EQUI_LEVELS],
    'ghst-single': [('gh-skew-t', nu, (b, 0.0)) for nu in (4.0, 10.0) for b in _SINGLE_LEVELS],
    'acst-general': [('ac-skew-t', nu, s) for nu in (1.0, 10.0) for s in _AC_GENERAL_SKEWS],
    'acst-equi': [('ac-skew-t', nu, (a, a)) for nu in (1.0, 10.0) for a in _EQUI_LEVELS],
    'acst-single': [('ac-skew-t', nu, (a, 0.0)) for nu in (1.0, 10.0) for a in _SINGLE_LEVELS],
    'sn-general': [('skew-normal', None, s) for s in _AC_GENERAL_SKEWS],
}

# ===== REFERENCE VALUES =====

GAUSSIAN_SPEARMAN_GAP = 0.0181  # max |rho_S - rho| for the Gaussian copula
TWO_OVER_PI = 2.0 / math.pi
SIX_OVER_PI = 6.0 / math.pi
