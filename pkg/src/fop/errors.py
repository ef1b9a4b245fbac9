"""Error taxonomy: validation failures vs numerical failures.

The CLI maps ValidationError to exit code 2, NumericalError to exit code 3,
and anything else to exit code 1.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or schema."""


class NumericalError(RuntimeError):
    """A numerically certified step failed (degeneracy, stall, instability)."""
