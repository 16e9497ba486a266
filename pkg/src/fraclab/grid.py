"""Truncated half-space grids with y-grading and weighted quadrature.

The y axis is graded toward the boundary, y_j = Y*(j/Ny)^gamma, so the
degenerate weight y^a and the boundary layer v ~ y^(1-a) are resolved without
per-order tuning.  All quadrature against y^a uses closed-form moments of the
weight against piecewise-linear hat functions, which keeps the first cell
(touching y = 0) exact for any a in (-1, 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

__all__ = [
    "HalfSpaceGrid",
    "build_grid",
    "weighted_integral",
    "restrict_to_radius",
    "sphere_weights",
]


class GridError(ValueError):
    pass


def _moment(p: float, a: float, b: float) -> float:
    """Integral of t^p over [a, b]; needs p > -1 and 0 <= a <= b when p non-integer."""
    q = p + 1.0
    return (b ** q - a ** q) / q


def hat_weights(nodes: np.ndarray, p: float, lo: float, hi: float) -> np.ndarray:
    """Node weights of f |-> int_[lo,hi] t^p f(t) dt for piecewise-linear f."""
    w = np.zeros(nodes.size)
    for k in range(nodes.size - 1):
        n0, n1 = nodes[k], nodes[k + 1]
        c0, c1 = max(n0, lo), min(n1, hi)
        if c1 <= c0:
            continue
        m0 = _moment(p, c0, c1)
        m1 = _moment(p + 1.0, c0, c1)
        dx = n1 - n0
        w[k] += (n1 * m0 - m1) / dx
        w[k + 1] += (m1 - n0 * m0) / dx
    return w


def unit_sphere_area(n: int) -> float:
    """Surface measure of S^(n-1) in R^n."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(frozen=True, eq=False)
class HalfSpaceGrid:
    boundary_dim: int
    L: float
    Nx: int
    Y: float
    Ny: int
    gamma: float
    radial: bool
    ambient_n: int
    x: np.ndarray = field(init=False)
    y: np.ndarray = field(init=False)

    def __post_init__(self):
        x0 = 0.0 if self.radial else -self.L
        object.__setattr__(self, "x", np.linspace(x0, self.L, self.Nx))
        j = np.arange(self.Ny + 1)
        object.__setattr__(
            self, "y", self.Y * (j / self.Ny) ** self.gamma
        )

    # -- geometry -----------------------------------------------------------

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n_eff(self) -> int:
        """Boundary dimension entering measures: ambient n in radial mode."""
        return self.ambient_n if self.radial else self.boundary_dim

    def x_faces(self) -> np.ndarray:
        """Control-volume bounds along x: Nx+1 values."""
        mid = 0.5 * (self.x[:-1] + self.x[1:])
        return np.concatenate(([self.x[0]], mid, [self.x[-1]]))

    def y_faces(self) -> np.ndarray:
        mid = 0.5 * (self.y[:-1] + self.y[1:])
        return np.concatenate(([0.0], mid, [self.Y]))

    # -- 1-D weight vectors (cached per exponent) ---------------------------

    @lru_cache(maxsize=None)
    def y_weights(self, a: float, hi: float | None = None) -> np.ndarray:
        hi = self.Y if hi is None else hi
        return hat_weights(self.y, a, 0.0, hi)

    @lru_cache(maxsize=None)
    def x_weights(self, lo: float | None = None, hi: float | None = None) -> np.ndarray:
        """Boundary-measure weights along one x axis (with r^(n-1) in radial mode)."""
        lo = self.x[0] if lo is None else lo
        hi = self.x[-1] if hi is None else hi
        if self.radial:
            w = hat_weights(self.x, float(self.ambient_n - 1), max(lo, 0.0), hi)
            return unit_sphere_area(self.ambient_n) * w
        return hat_weights(self.x, 0.0, lo, hi)

    @lru_cache(maxsize=None)
    def y_transmissibility(self, a: float) -> np.ndarray:
        """Exact two-point conductances (1-a)/(y1^(1-a)-y0^(1-a)) per y cell."""
        e = 1.0 - a
        return e / (self.y[1:] ** e - self.y[:-1] ** e)

    @lru_cache(maxsize=None)
    def y_cell_moments(self, a: float) -> np.ndarray:
        """int y^a dy over the control height of each y row."""
        f = self.y_faces()
        return np.array([_moment(a, f[j], f[j + 1]) for j in range(self.Ny + 1)])

    @lru_cache(maxsize=None)
    def x_cell_measures(self) -> np.ndarray:
        """Boundary measure of each x control cell (with omega r^(n-1) in radial mode)."""
        f = self.x_faces()
        if self.radial:
            n = self.ambient_n
            m = np.array([_moment(n - 1.0, f[i], f[i + 1]) for i in range(self.Nx)])
            return unit_sphere_area(n) * m
        return np.diff(f)

    @lru_cache(maxsize=None)
    def x_face_metric(self) -> np.ndarray:
        """Metric factor on the Nx-1 interior x faces (1 in slab mode)."""
        if self.radial:
            mid = 0.5 * (self.x[:-1] + self.x[1:])
            return unit_sphere_area(self.ambient_n) * mid ** (self.ambient_n - 1)
        return np.ones(self.Nx - 1)

    # -- region weights -----------------------------------------------------

    def boundary_weights(self, R: float | None = None) -> np.ndarray:
        """Quadrature weights over the boundary slab y = 0 (|x| < R if given)."""
        if R is None:
            w = self.x_weights()
        else:
            w = self.x_weights(-R, R)
        if self.boundary_dim == 2:
            if R is None:
                return np.multiply.outer(w, w)
            # disk of radius R in the boundary plane: linear cut-cell coverage
            w0 = np.multiply.outer(self.x_weights(), self.x_weights())
            xx, yy = np.meshgrid(self.x, self.x, indexing="ij")
            return w0 * self._coverage(np.hypot(xx, yy), R, (self.hx, self.hx))
        return w

    def bulk_weights(self, a: float, region: str = "full", R: float | None = None):
        """Node weights for int over the region of y^a * f, f multilinear.

        Regions: "full" (whole box), "cylinder" (C_R = B_R x (0,R)),
        "halfball" (B_R^+), each requiring R <= min(L, Y) except "full".
        """
        if not -1.0 < a < 1.0:
            raise GridError(f"weight exponent must lie in (-1,1), got {a}")
        if region == "full":
            return self._tensor(self.x_weights(), self.y_weights(a))
        if R is None:
            raise GridError(f"region {region!r} needs a radius")
        if R < 0 or R > min(self.L, self.Y) + 1e-12:
            raise GridError(f"radius {R} exceeds grid extent")
        if region == "cylinder":
            wx = self.x_weights(-R, R)
            return self._tensor_x(wx, self.y_weights(a, hi=float(R)))
        if region == "halfball":
            w0 = self.bulk_weights(a, "full")
            dist, widths = self._node_distances()
            return w0 * self._coverage(dist, R, widths)
        raise GridError(f"unknown region {region!r}")

    def _tensor(self, wx, wy):
        return self._tensor_x(wx, wy)

    def _tensor_x(self, wx, wy):
        if self.boundary_dim == 2:
            return np.einsum("i,j,k->ijk", wx, wx, wy)
        return np.multiply.outer(wx, wy)

    def _node_distances(self):
        if self.boundary_dim == 2:
            xx, zz, yy = np.meshgrid(self.x, self.x, self.y, indexing="ij")
            return np.sqrt(xx ** 2 + zz ** 2 + yy ** 2), (self.hx, self.hx, None)
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        return np.hypot(xx, yy), (self.hx, None)

    def _coverage(self, dist, R, widths):
        """Linear volume fraction of each control cell inside radius R."""
        # half-diagonal of the control volume; y width varies per row
        hy = np.diff(self.y_faces())
        w = 0.0
        for wi in widths[:-1]:
            w = w + (wi / 2.0) ** 2
        if widths[-1] is None:
            half = np.sqrt(w + (hy / 2.0) ** 2)  # broadcast over last axis
        else:
            half = math.sqrt(w + (widths[-1] / 2.0) ** 2)
        return np.clip(0.5 + (R - dist) / (2.0 * half), 0.0, 1.0)

    # -- derivatives --------------------------------------------------------

    def gradients(self, f: np.ndarray):
        """Centered-difference gradient components of node samples."""
        if self.boundary_dim == 2:
            return np.gradient(f, self.x, self.x, self.y, edge_order=2)
        return np.gradient(f, self.x, self.y, edge_order=2)


def build_grid(
    L: float, Nx: int, Y: float, Ny: int, gamma: float = 3.0,
    radial: bool = False, ambient_n: int = 1, boundary_dim: int = 1,
) -> HalfSpaceGrid:
    if L <= 0 or Y <= 0:
        raise GridError("domain extents must be positive")
    if Nx < 3 or Nx % 2 == 0:
        raise GridError("Nx must be an odd integer >= 3 (center node required)")
    if Ny < 2:
        raise GridError("Ny must be >= 2")
    if gamma < 1.0:
        raise GridError("grading exponent must be >= 1")
    if boundary_dim not in (1, 2):
        raise GridError("boundary_dim must be 1 or 2")
    if radial:
        if boundary_dim != 1:
            raise GridError("radial mode stores the profile on a 1-D r axis")
        if ambient_n < 2:
            raise GridError("radial mode needs ambient n >= 2 (n = 1 is the slab)")
    return HalfSpaceGrid(boundary_dim, float(L), int(Nx), float(Y), int(Ny),
                         float(gamma), bool(radial), int(ambient_n))


def restrict_to_radius(f: np.ndarray, R: float, region: str, grid: HalfSpaceGrid,
                       a: float = 0.0):
    """Masked samples and partial-cell weights of f on C_R or B_R^+."""
    w = grid.bulk_weights(a, region, R)
    if f.shape != w.shape:
        raise GridError("sample array does not match the grid")
    return np.where(w > 0.0, f, 0.0), w


def weighted_integral(f: np.ndarray, a: float, region: str, grid: HalfSpaceGrid,
                      R: float | None = None, x_index: int | None = None) -> float:
    """Integral of y^a f over a region, exact on the leading singular power.

    Regions "full" / "cylinder" / "halfball" integrate over the bulk,
    "boundary" over the y = 0 slab (no weight), "fiber" along the vertical
    line at node x_index.
    """
    if not -1.0 < a < 1.0:
        raise GridError(f"weight exponent must lie in (-1,1), got {a}")
    if region == "fiber":
        if x_index is None:
            raise GridError("fiber region needs x_index")
        return float(np.dot(grid.y_weights(a), np.asarray(f)))
    if region == "boundary":
        return float(np.sum(grid.boundary_weights(R) * np.asarray(f)))
    w = grid.bulk_weights(a, region, R)
    return float(np.sum(w * np.asarray(f)))


def sphere_weights(grid: HalfSpaceGrid, R: float, a: float, order: int = 80):
    """Quadrature for int over the spherical cap (|X| = R, y > 0) of y^a g.

    Returns sample coordinates (x, y) and weights absorbing y^a and the
    surface measure (with the omega_(n-1) r^(n-1) factor in radial mode).
    The endpoint singularity of y^a at y -> 0 is handled by Gauss-Jacobi
    nodes matched to the weight exponent.
    """
    if grid.boundary_dim != 1:
        raise GridError("spherical-cap quadrature is for 1-D boundary grids")
    if R > min(grid.L, grid.Y) + 1e-12:
        raise GridError(f"radius {R} exceeds grid extent")
    if grid.radial:
        # quarter arc theta in (0, pi/2); y^a singular at theta = 0 only
        xi, wj = roots_jacobi(order, 0.0, a)
        theta = (math.pi / 4.0) * (1.0 + xi)
        rho = np.sin(theta) / (1.0 + xi)
        r = R * np.cos(theta)
        y = R * np.sin(theta)
        n = grid.ambient_n
        w = (wj * (R ** a) * rho ** a
             * unit_sphere_area(n) * r ** (n - 1) * R * (math.pi / 4.0))
        return r, y, w
    # half circle theta in (0, pi); y^a singular at both ends
    xi, wj = roots_jacobi(order, a, a)
    theta = (math.pi / 2.0) * (1.0 + xi)
    y = R * np.cos(math.pi * xi / 2.0)  # = R sin(theta)
    x = R * np.cos(theta)
    rho = np.cos(math.pi * xi / 2.0) / (1.0 - xi ** 2)
    w = wj * (R ** a) * rho ** a * R * (math.pi / 2.0)
    return x, y, w
