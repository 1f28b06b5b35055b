"""Exception taxonomy.

Errors derived from ValueError signal bad inputs (rejected before any real
work starts); errors derived from RuntimeError signal numerical failures of
an otherwise well-posed computation.  The CLI maps the former to exit code 2
and the latter to exit code 3.
"""


class ConfigError(ValueError):
    """Malformed run configuration or command-line arguments."""


class ParameterError(ValueError):
    """Physical parameters out of range or inconsistent."""


class BasisError(ValueError):
    """Quadrature basis mismatch or malformed basis."""


class CovarianceError(ValueError):
    """Covariance matrix violating structural invariants."""


class BracketError(ValueError):
    """Root bracket whose endpoints do not straddle a sign change."""


class UnstableModelError(RuntimeError):
    """Steady state requested for a model with a non-decaying drift."""


class IntegrationError(RuntimeError):
    """Fixed-step integration failed its step-halving accuracy check."""


class NumericalError(RuntimeError):
    """Linear algebra failure (singular system, non-finite result)."""
