"""Exception types shared across the package.

The CLI maps ConfigurationError to exit code 1 and NumericalError to
exit code 2.
"""


class ConfigurationError(ValueError):
    """Invalid parameters, specs, or inputs that violate a precondition."""


class NumericalError(RuntimeError):
    """An iterative procedure failed to converge or lost required structure."""
