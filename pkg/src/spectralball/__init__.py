"""Exact polynomial vector fields on 2x2 matrices, their decomposition into
elementary generators, and numeric automorphisms of the 2x2 spectral ball."""

from .decompose import (
    Certificate,
    CertificateTerm,
    check_constraints,
    decompose,
    parse_certificate,
    random_orthogonal_field,
    realize,
    reconstruct,
    split_v1,
)
from .fields import GeneratorTerm, VectorField, divergence, format_field, lie_bracket, make_generator, parse_field
from .parsing import ParseError, parse_poly
from .poly import EUCLID, FIBER, INVARIANT, SPECTRAL, Poly, format_poly, from_spectral, to_spectral

__version__ = "0.1.0"
