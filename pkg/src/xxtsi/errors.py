"""Exception types shared across the numerical pipeline."""


class NumericalError(RuntimeError):
    """An internal consistency check failed: eigenvalue outside the allowed
    window, unexpected imaginary part, non-conserved quantum number."""


class TruncationError(RuntimeError):
    """A truncated correlator sum could not certify its tail bound; retry
    with a larger radius or in exact mode."""
