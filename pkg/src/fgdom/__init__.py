"""Monodromy of Fock-Goncharov coordinates, planar networks and length domination."""

from .coords import (
    BuildingBlockSpec,
    EdgeInvariants,
    FGCoordinates,
    MonodromyWord,
    TriangleInvariants,
    bend_to_positive,
    bend_word,
    validate,
)
from .factory import build_block, monodromy
from .spectral import eigen_moduli, length_report

__all__ = [
    "BuildingBlockSpec",
    "EdgeInvariants",
    "FGCoordinates",
    "MonodromyWord",
    "TriangleInvariants",
    "bend_to_positive",
    "bend_word",
    "build_block",
    "eigen_moduli",
    "length_report",
    "monodromy",
    "validate",
]

__version__ = "0.1.0"
