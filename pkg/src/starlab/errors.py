"""Exception types shared across the package."""


class StarlabError(Exception):
    """Base class for all package errors."""


class NonPositiveDefinite(StarlabError):
    """A metric lost positive-definiteness (smallest eigenvalue below threshold)."""


class PositivityLost(NonPositiveDefinite):
    """The evolving metric degenerated during a flow step."""


class StepRejected(StarlabError):
    """A time step produced non-finite values or violated the stability guard."""


class NotNormalized(StarlabError):
    """The weight field does not integrate to 1 within tolerance."""


class InsufficientJet(StarlabError):
    """A derivative of higher order than the supplied jet was requested."""


class ShapeMismatch(StarlabError):
    """Tensor component arrays do not match the declared ranks/dimension."""


class ConfigError(StarlabError):
    """Scenario configuration is invalid or inconsistent."""


class RefusedOverwrite(StarlabError):
    """Output path exists and --force was not given."""


class IoError(StarlabError):
    """Failed to read or write an artifact file."""
