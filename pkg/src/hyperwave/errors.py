"""Exception types shared across the package.

The distinction matters for the command line tool: configuration and
regime problems exit with a different status than numerical failures.
"""


class HyperwaveError(Exception):
    """Base class for all package-specific errors."""


class RegimeError(HyperwaveError, ValueError):
    """Parameters lie in a regime where the requested object does not exist."""


class DomainError(HyperwaveError, ValueError):
    """Evaluation requested outside the domain covered by the data."""


class IntegrationError(HyperwaveError, RuntimeError):
    """The integrator could not produce a trustworthy trajectory.

    Carries the last valid partial trajectory when one exists, so callers
    can inspect how far the run got.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigError(HyperwaveError, ValueError):
    """Malformed or inconsistent run configuration."""
