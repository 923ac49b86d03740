"""Run-and-tumble chemotaxis simulation suite.

A Monte Carlo particle engine for the kinetic transport model with internal
adaptation and finite tumbling duration, finite-volume solvers for its two
continuum limits, diagnostics for the bimodal (volcano) aggregation regime,
and a batch CLI with reproducible manifests.
"""

__version__ = "0.1.0"

from .errors import ChemokinError, ConfigError, NumericalError
from .model import (
    ChemoField,
    ModelParams,
    ScalingMode,
    equilibrium_M,
    lambda_response,
    resolve_tau,
    response_F,
)

__all__ = [
    "__version__",
    "ChemokinError",
    "ConfigError",
    "NumericalError",
    "ChemoField",
    "ModelParams",
    "ScalingMode",
    "equilibrium_M",
    "lambda_response",
    "resolve_tau",
    "response_F",
]
