"""Error types shared across the package.

The CLI maps these onto exit codes: usage problems are left to argparse,
everything below exits with status 1 and a one-line diagnostic.
"""

__all__ = [
    "VoltrackError",
    "DataError",
    "SolverError",
    "ScenarioError",
    "TuningError",
]


class VoltrackError(Exception):
    """Base class for all package-specific failures."""


class DataError(VoltrackError):
    """Malformed or out-of-domain input data (prices, observations, configs)."""


class SolverError(VoltrackError):
    """The Riccati iteration failed or produced an invalid solution."""

    def __init__(self, message: str, residual_norm: float | None = None):
        if residual_norm is not None:
            message = f"{message} (residual norm {residual_norm:.3e})"
        super().__init__(message)
        self.residual_norm = residual_norm


class ScenarioError(VoltrackError):
    """A simulation scenario violates the model assumptions."""


class TuningError(VoltrackError):
    """A parameter search could not produce a feasible optimum."""
