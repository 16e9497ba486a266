"""Numerical laboratory for coupled fractional gradient systems.

Solves the degenerate-elliptic extension formulation of
(-lap)^(s_i) u_i = d/du_i H(u) on truncated half-spaces and verifies the
quantitative identities and estimates satisfied by the solutions: the
layer conservation law, energy growth rates, the monotonicity formula,
stability and spectral positivity, quotient-field rigidity, and decay
envelopes.
"""

__version__ = "0.1.0"

from .grid import HalfSpaceGrid, build_grid
from .nonlinearity import NonlinearitySpec, Term
from .orders import FractionalOrders, make_orders
from .solver import BoundaryData, FieldSet, SolveReport, solve_coupled

__all__ = [
    "__version__",
    "HalfSpaceGrid",
    "build_grid",
    "NonlinearitySpec",
    "Term",
    "FractionalOrders",
    "make_orders",
    "BoundaryData",
    "FieldSet",
    "SolveReport",
    "solve_coupled",
]
