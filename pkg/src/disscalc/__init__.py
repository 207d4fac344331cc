"""Functional calculus and operator integrals for pairs of dissipative matrices."""

from .errors import (
    ConfigInvalid,
    ConstantTermPresent,
    DimensionMismatch,
    DisscalcError,
    NotAnalytic,
    NyquistViolation,
    SolveFailure,
    VersionMismatch,
    ZeroPerturbation,
)
from .kernels import BACKEND
from .scalar_functions import AnalyticExpSum2D, OneVarFunction, load_function

__version__ = "0.1.0"

__all__ = [
    "AnalyticExpSum2D",
    "BACKEND",
    "ConfigInvalid",
    "ConstantTermPresent",
    "DimensionMismatch",
    "DisscalcError",
    "NotAnalytic",
    "NyquistViolation",
    "OneVarFunction",
    "SolveFailure",
    "VersionMismatch",
    "ZeroPerturbation",
    "load_function",
    "__version__",
]
