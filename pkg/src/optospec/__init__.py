"""Analytic absorption spectra of a damped optomechanical cavity."""

from .model import (
    BornApproximationWarning,
    DerivedConstants,
    MEVariant,
    ModelParams,
    derive_constants,
    validate_params,
)
from .eigensystem import (
    DegenerateEigenvalueError,
    EigenLabel,
    Truncation,
    TruncationWarning,
    eigenvalue,
)

__all__ = [
    "BornApproximationWarning",
    "DegenerateEigenvalueError",
    "DerivedConstants",
    "EigenLabel",
    "MEVariant",
    "ModelParams",
    "Truncation",
    "TruncationWarning",
    "derive_constants",
    "eigenvalue",
    "validate_params",
]
