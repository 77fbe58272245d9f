"""Exception types shared across the package."""


class RouthsimError(Exception):
    """Base class for all errors raised by this package."""


class NoConvergence(RouthsimError):
    """Newton iteration failed to reach the requested tolerance."""

    def __init__(self, message, last_iterate=None, residual_norm=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_norm = residual_norm


class SingularJacobian(RouthsimError):
    """The linear solve inside a Newton iteration failed."""


class NonFiniteValue(RouthsimError):
    """A function returned NaN or Inf where a finite value was required."""


class StepRejected(RouthsimError):
    """A step left the validity region of the coordinate chart."""


class SingularConfiguration(RouthsimError):
    """Evaluation requested at a configuration where the system is singular."""


class MomentumMismatch(RouthsimError):
    """A seed pair does not carry the requested discrete momentum."""


class UnsupportedStageCount(RouthsimError):
    """No tableau is available for the requested stage count."""


class ConfigError(RouthsimError):
    """A run configuration failed validation."""
