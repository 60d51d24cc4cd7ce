"""XL-family solvers for quadratic systems over small finite fields.

The package covers field arithmetic, sparse multivariate polynomials, Macaulay
matrices (plain and over a polynomial coefficient ring), exact linear algebra,
the XL / hybrid XL / hybrid Wiedemann XL / polynomial XL solvers and an
analytical cost estimator.
"""

__version__ = "0.1.0"

from .field import FieldContext, make_field
from .polyring import Polynomial, QuadraticSystem, random_system
from .xl import SolveOutcome, SolverConfig, Status, hybrid_solve, xl_solve
from .pxl import linearize1, pxl_solve

__all__ = [
    "__version__",
    "FieldContext",
    "make_field",
    "Polynomial",
    "QuadraticSystem",
    "random_system",
    "SolverConfig",
    "SolveOutcome",
    "Status",
    "xl_solve",
    "hybrid_solve",
    "pxl_solve",
    "linearize1",
]
