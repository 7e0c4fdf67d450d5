"""Exact arithmetic: rationals, multivariate and univariate polynomials, real roots."""
from .mpoly import MPoly, falling_factorial, poly_mul, poly_substitute
from .rational import Rat, as_rat, format_rat, parse_rat, rat_sqrt
from .roots import RootInterval, rational_roots, refine, sturm_isolate_roots
from .upoly import UPoly, upoly_from_roots

__all__ = [
    "MPoly", "UPoly", "Rat", "RootInterval",
    "as_rat", "format_rat", "parse_rat", "rat_sqrt",
    "poly_mul", "poly_substitute", "falling_factorial",
    "sturm_isolate_roots", "refine", "rational_roots", "upoly_from_roots",
]
