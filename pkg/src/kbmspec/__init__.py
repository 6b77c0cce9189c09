"""Spectral analysis of the kinetic Brownian motion generator on unitary representations of PSL(2,R)."""

from .errors import (
    HypothesisViolation,
    InvalidInputError,
    KBMError,
    NumericalError,
)
from .rep_core import (
    OperatorMatrix,
    RepresentationModel,
    Symbol,
    TruncationWindow,
    assemble_operator,
    default_window,
    make_representation,
    parse_representation,
)

__version__ = "0.1.0"

__all__ = [
    "HypothesisViolation",
    "InvalidInputError",
    "KBMError",
    "NumericalError",
    "OperatorMatrix",
    "RepresentationModel",
    "Symbol",
    "TruncationWindow",
    "assemble_operator",
    "default_window",
    "make_representation",
    "parse_representation",
]
