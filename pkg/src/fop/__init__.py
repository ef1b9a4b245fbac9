"""Integer-valued Euler counts for derived orbifold charts [V/G].

The pipeline: finite groups (groups), unitary representations (reps),
equivariant polynomial spaces (equipoly), isotropy strata of the
evaluation variety with transversality certificates (strata), a homotopy
continuation solver (psolve), and the counting pipeline itself (euler).
"""

__version__ = "0.1.0"
