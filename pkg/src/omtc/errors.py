"""Error types shared across the package.

The CLI maps ConfigurationError to exit code 2 and NumericalError to
exit code 3; everything else is a bug.
"""


class ConfigurationError(ValueError):
    """Invalid parameters, cutoffs, or config-file content."""


class NumericalError(RuntimeError):
    """Runtime failure of the numerics (instability, budget overrun)."""
