"""Variational integrators with abelian symmetry reduction."""

from .core import MechanicalSystem, ReducedSystem, newton_solve
from .errors import (
    ConfigError,
    MomentumMismatch,
    NoConvergence,
    NonFiniteValue,
    RouthsimError,
    SingularConfiguration,
    SingularJacobian,
    StepRejected,
    UnsupportedStageCount,
)

__all__ = [
    "MechanicalSystem",
    "ReducedSystem",
    "newton_solve",
    "RouthsimError",
    "NoConvergence",
    "SingularJacobian",
    "NonFiniteValue",
    "StepRejected",
    "SingularConfiguration",
    "MomentumMismatch",
    "UnsupportedStageCount",
    "ConfigError",
]

__version__ = "0.1.0"
