"""Exceptional sequences of lattice points and their contamination closure."""

__version__ = "0.1.0"

from .core import (
    CubeLabeling,
    DimVec,
    ExcSeq,
    Group,
    SymmetryOp,
    apply_symmetry,
    canonical_form,
    is_exceptional,
    label,
    standard_sequence,
    width,
)
from .contamination import Flat, FlatSet, closure, cont_step, is_full

__all__ = [
    "CubeLabeling",
    "DimVec",
    "ExcSeq",
    "Flat",
    "FlatSet",
    "Group",
    "SymmetryOp",
    "apply_symmetry",
    "canonical_form",
    "closure",
    "cont_step",
    "is_exceptional",
    "is_full",
    "label",
    "standard_sequence",
    "width",
]
