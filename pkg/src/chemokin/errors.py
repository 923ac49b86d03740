"""Exception types shared across the package."""


class ChemokinError(Exception):
    """Base class for all package errors."""


class ConfigError(ChemokinError, ValueError):
    """Invalid parameters or run configuration (CLI exit code 2)."""


class NumericalError(ChemokinError, RuntimeError):
    """Numerical failure during a run: NaN observables, CFL violation,
    negative mass beyond tolerance (CLI exit code 3)."""
