"""Constraint gadgets, polynomial squaring, interpretations and numeric verifiers."""

from .encodings import (
    encode_integer,
    encode_rational_coefficient,
    integer_chain_length,
    mult_from_square,
    scale_integer,
)
from .interpret import (
    Interpretation,
    PolySystem,
    interpret_positive,
    interpret_unit_interval,
    numeric_search,
)
from .numeric import (
    DomainError,
    IdentityReport,
    MidpointWitness,
    NumericFn,
    build_fbar,
    custom_fn,
    midpoint_witness,
    numeric_fn,
    verify_identity,
)
from .polynomial import Polynomial, SquareCombination, degree_basis, poly_to_square

__all__ = [
    "encode_integer", "encode_rational_coefficient", "integer_chain_length", "mult_from_square",
    "scale_integer", "Interpretation", "PolySystem", "interpret_positive",
    "interpret_unit_interval", "numeric_search", "DomainError", "IdentityReport",
    "MidpointWitness", "NumericFn", "build_fbar", "custom_fn", "midpoint_witness", "numeric_fn",
    "verify_identity", "Polynomial", "SquareCombination", "degree_basis", "poly_to_square",
]
