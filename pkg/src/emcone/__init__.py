"""Exact exponential sums and integrals on lattice cones, with Euler-Maclaurin interpolators."""

from .coalgebra import (
    ConeFunctional,
    birkhoff_factorize,
    convolution_inverse,
    convolve,
    coproduct,
    reduced_coproduct,
)
from .cones import Cone, ConeError, LatticeCone, faces, lattice_cone, primary_generators, transverse
from .eulermaclaurin import (
    I_integral,
    S_closed,
    S_open,
    catalog,
    factorization,
    mu,
    numeric_crosscheck,
    verify_em,
    verify_subdivision_properties,
)
from .germs import Germ, GermError, InsufficientOrder, germ_eq, pi_minus, pi_plus, polar_decompose
from .linalg import InnerProduct
from .subdivision import Subdivision, analyze, smooth_subdivide, triangulate, validate_subdivision

__all__ = [
    "Cone", "ConeError", "ConeFunctional", "Germ", "GermError", "I_integral", "InnerProduct",
    "InsufficientOrder", "LatticeCone", "S_closed", "S_open", "Subdivision", "analyze",
    "birkhoff_factorize", "catalog", "convolution_inverse", "convolve", "coproduct", "factorization",
    "faces", "germ_eq", "lattice_cone", "mu", "numeric_crosscheck", "pi_minus", "pi_plus",
    "polar_decompose", "primary_generators", "reduced_coproduct", "smooth_subdivide", "transverse",
    "triangulate", "validate_subdivision", "verify_em", "verify_subdivision_properties",
]
