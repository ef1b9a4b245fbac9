"""Numeric tolerances, size caps, and seeds shared across the library.

Every comparison against a fixed epsilon anywhere in the package goes
through a constant defined here, so the tolerance story can be audited in
one place.
"""

# Structural identities that hold exactly in exact arithmetic
# (multiplication tables, homomorphism property, unitarity, projectors).
STRUCT_TOL = 1e-10

# Quantities that must be integers (dimensions, multiplicities, counts)
# are rounded; the pre-rounding distance to the nearest integer must stay
# below this.
INT_TOL = 1e-6

# Relative radius used to decide whether a group element fixes a point.
STAB_RADIUS_REL = 1e-7

# Rank-revealing reduction of spanning sets keeps columns whose residual
# against the accepted span exceeds this.
PIVOT_TOL = 1e-9

# Sampled equivariance residual for maps that claim equivariance.
EQUIV_TOL = 1e-8

# Residual for membership of a polynomial in a module span.
SPAN_TOL = 1e-8

# Residual for interpolation targets and for the slice-restriction /
# equivariant-extension round trip.
INTERP_TOL = 1e-9

# Evaluation-preserving degree reduction must keep the value at the marked
# point to this relative accuracy.
EXACT_TOL = 1e-10

# Minimum pairwise separation of orbit points after a random 1-dim
# projection (relative to the projection scale).
PROJ_SEP = 1e-6

# Transversality certificate margin threshold (relative to problem scale).
CERT_TAU = 1e-8

# Polynomial solver: residual bound at reported points, Newton polish
# target, solution clustering radius, path-at-infinity threshold, minimal
# homotopy step.
SOLVE_TOL = 1e-9
POLISH_TOL = 1e-12
DEDUP_RADIUS = 1e-6
DIVERGENCE = 1e8
STEP_FLOOR = 1e-12
# Largest move the path corrector may make relative to the predicted
# point.  A correction is a repair of O(dt^2) prediction error; a move of
# this size means the corrector left the path's basin (typically onto a
# neighbouring path near t = 1), so the step is rejected instead.
CORRECTOR_TRUST = 0.5
# A path whose endpoint exceeds this norm at t = 1 is counted as diverged
# even if the corrector tolerance (which scales with |x|^deg) accepted it:
# residuals at such points say nothing at working precision.
ENDPOINT_AT_INFINITY = 1e4

# Hard size caps.
MAX_GROUP_ORDER = 64
MAX_PERM_DEGREE = 12
MAX_REP_DIM = 6
MAX_BASIS_DEGREE = 12
MAX_BASIS_VARS = 4
MAX_SOLVE_VARS = 4
BEZOUT_CAP = 5000
MAX_ISO_SEARCH_ORDER = 24

# Deterministic seeds: representation-theoretic randomness (splitting,
# projections) and the solver's path-tracking randomness.
REP_SEED = 0x5EED
SOLVE_SEED = 0xB0B0

# Default relative magnitude of the transversality perturbation.
PERTURB_MAG = 1e-2
