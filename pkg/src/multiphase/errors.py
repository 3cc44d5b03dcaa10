"""Exception types shared across the package."""


class InvariantViolation(ValueError):
    """A constructed object failed one of its structural checks.

    Raised when numerical data violates a property the rest of the code
    relies on (symmetry, normalization, orthonormality, ...).  The CLI maps
    this to its own exit code so scripted runs can tell bad data apart from
    bad flags.
    """


class NumericalFailure(RuntimeError):
    """An iterative routine did not reach its convergence target."""
