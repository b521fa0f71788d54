"""Exact cyclic homology of finite dg algebras.

Hochschild and cyclic complexes, the cyclic Kuenneth map and its compatibility
with the canonical u-connection, and a Thom-Sebastiani check for matrix
factorization algebras of quasi-homogeneous polynomials.
"""
from .dgalg import DgAlgebra, bundled_algebra, random_algebra, validate
from .exactnum import LaurentScalar

__version__ = "0.1.0"
__all__ = ["DgAlgebra", "LaurentScalar", "bundled_algebra", "random_algebra", "validate",
           "__version__"]
