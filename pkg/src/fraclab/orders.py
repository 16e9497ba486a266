"""Per-component fractional orders and their derived constants.

Each component i of the system carries an order s_i in (0,1).  The extension
formulation attaches to it the weight exponent a_i = 1 - 2 s_i and the
normalization constant

    d_i = Gamma(1 - s_i) / (2^(2 s_i - 1) Gamma(s_i)),

which converts the weighted normal derivative at y = 0 into the action of the
fractional Laplacian on the trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["FractionalOrders", "make_orders", "symbol_constant"]


class InvalidOrderError(ValueError):
    """Raised for orders outside the open interval (0, 1)."""


def _d_constant(s: float) -> float:
    # Gamma(1-s) / (2^(2s-1) Gamma(s)); math.gamma is accurate to ~1e-15 rel.
    return math.gamma(1.0 - s) / (2.0 ** (2.0 * s - 1.0) * math.gamma(s))


@dataclass(frozen=True)
class FractionalOrders:
    """Vector of orders s with derived weights a and constants d."""

    s: np.ndarray
    a: np.ndarray = field(init=False)
    d: np.ndarray = field(init=False)

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.s, dtype=float))
        if s.size == 0:
            raise InvalidOrderError("order vector must be nonempty")
        if np.any(s <= 0.0) or np.any(s >= 1.0):
            raise InvalidOrderError(f"orders must lie strictly in (0,1), got {s}")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "a", 1.0 - 2.0 * s)
        object.__setattr__(self, "d", np.array([_d_constant(si) for si in s]))

    @property
    def m(self) -> int:
        return self.s.size

    @property
    def s_min(self) -> float:
        return float(self.s.min())

    @property
    def s_max(self) -> float:
        return float(self.s.max())

    @property
    def equal(self) -> bool:
        """True when all components share a single order."""
        return bool(np.all(self.s == self.s[0]))


def make_orders(s) -> FractionalOrders:
    """Build FractionalOrders from a sequence of orders in (0,1)."""
    return FractionalOrders(np.asarray(s, dtype=float))


def symbol_constant(s: float) -> float:
    """Normalization C(1,s) of the 1-D principal-value kernel.

    Chosen so that the operator has Fourier symbol |xi|^(2s), the same
    convention under which d_s is the Dirichlet-to-Neumann factor.
    """
    if not 0.0 < s < 1.0:
        raise InvalidOrderError(f"order must lie in (0,1), got {s}")
    return (
        2.0 ** (2.0 * s)
        * math.gamma(0.5 + s)
        / (math.sqrt(math.pi) * abs(math.gamma(-s)))
    )
