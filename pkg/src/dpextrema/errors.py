"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument, bounds, or configuration value."""


class NumericError(RuntimeError):
    """Numerical failure, e.g. an irreparably singular noisy matrix."""


class DegeneracyError(NumericError):
    """Estimate or bootstrap too degraded to produce a usable limit."""


class LedgerError(RuntimeError):
    """Privacy accounting violation, e.g. charging one statistic twice."""
