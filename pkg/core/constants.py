"""
Constants for the application.
"""
import math

# Kernel parameters
DEFAULT_SIGMA = 1.0
DEFAULT_LAMBDA = math.inf

# Pocket extraction cutoff in Angstrom
DEFAULT_CUTOFF_RADIUS = 5.3

# Overlap tolerance for the Poisson index, Angstrom
DEFAULT_OVERLAP_TOLERANCE = 1.0

# Neighbours used by the KNN classifier when no grid is given
DEFAULT_K = 3

# Gradient ascent defaults
DEFAULT_MAX_ITERATIONS = 300
DEFAULT_GRADIENT_TOLERANCE = 1e-5
DEFAULT_SCORE_TOLERANCE = 1e-9
DEFAULT_INITIAL_STEP = 0.1
MAX_STEP = 1.0
MIN_STEP = 1e-12
DEFAULT_AXIS_SIMILARITY_RATIO = 0.9
DEFAULT_EXTRA_RANDOM_STARTS = 2

# Two rotations closer than this (Frobenius) are the same start
ROTATION_DEDUP_TOLERANCE = 1e-9

# Default hyperparameter grids for double cross-validation
DEFAULT_K_VALUES = [1, 3, 5, 7]
DEFAULT_SIGMA_VALUES = [0.5, 1.0, 2.0, 4.0]
DEFAULT_LAMBDA_VALUES = [0.25, 1.0, 4.0, math.inf]
DEFAULT_RADIUS_VALUES = [4.5, 5.3, 6.0]
# Multipliers of the median(sup-CK) / median(Vol) scale
DEFAULT_ALPHA_VALUES = [0.0, 0.01, 0.1, 1.0, 10.0]

# Relative eigenvalue threshold below which kernel PCA treats a value as zero
EIGENVALUE_RELATIVE_TOLERANCE = 1e-10

# Residue names treated as water
WATER_RESIDUES = {"HOH", "WAT", "DOD", "H2O"}
