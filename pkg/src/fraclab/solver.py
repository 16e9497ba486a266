"""Finite-volume solver for the degenerate extension system.

The discrete operator balances fluxes of y^a grad(v) across control-volume
faces.  Vertical conductances use the exact two-point form
(1-a)/(y1^(1-a)-y0^(1-a)), which reproduces the homogeneous solution y^(1-a)
of (y^a v')' = 0 without resolving the blow-up of v' at y = 0.  The nonlinear
Neumann condition -lim y^a dv_i/dy = d_i dH/dv_i enters as a source on the
y = 0 row, and Newton couples components only through that row.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridError, HalfSpaceGrid
from .nonlinearity import NonlinearitySpec
from .orders import FractionalOrders

__all__ = [
    "FieldSet",
    "SolveReport",
    "BoundaryData",
    "assemble_operator",
    "solve_coupled",
    "solve_radial",
    "harmonic_extension",
    "layer_profile",
    "dtn",
]

MAGIC = b"FLAB"
VERSION = 1
DTN_COND_LIMIT = 1e8


class SolverError(RuntimeError):
    pass


class JacobianError(SolverError):
    """Singular Newton linearization."""


# ---------------------------------------------------------------------------
# fields

@dataclass(frozen=True)
class FieldSet:
    """m-component discrete solution on a half-space grid."""

    values: tuple
    grid: HalfSpaceGrid
    orders: FractionalOrders

    def __post_init__(self):
        vals = tuple(np.asarray(v, dtype=float) for v in self.values)
        if len(vals) != self.orders.m:
            raise SolverError("component count does not match the orders")
        shape = self.grid_shape(self.grid)
        for v in vals:
            if v.shape != shape:
                raise SolverError(f"field shape {v.shape} != grid shape {shape}")
            if not np.all(np.isfinite(v)):
                raise SolverError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @staticmethod
    def grid_shape(grid: HalfSpaceGrid) -> tuple:
        if grid.boundary_dim == 2:
            return (grid.Nx, grid.Nx, grid.Ny + 1)
        return (grid.Nx, grid.Ny + 1)

    @property
    def m(self) -> int:
        return len(self.values)

    def trace(self, i: int) -> np.ndarray:
        """Boundary values v_i(., y=0)."""
        return self.values[i][..., 0]

    def traces(self) -> np.ndarray:
        """All boundary values stacked on the last axis."""
        return np.stack([self.trace(i) for i in range(self.m)], axis=-1)

    # -- flat binary snapshots (little-endian) ------------------------------

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack(
                "<6I", VERSION, self.m, self.grid.Nx, self.grid.Ny,
                int(self.grid.radial), self.grid.ambient_n,
            ))
            fh.write(self.orders.s.astype("<f8").tobytes())
            for v in self.values:
                fh.write(np.ascontiguousarray(v, dtype="<f8").tobytes())

    @staticmethod
    def load(path, grid: HalfSpaceGrid) -> "FieldSet":
        with open(path, "rb") as fh:
            if fh.read(4) != MAGIC:
                raise SolverError(f"{path}: not a field snapshot")
            ver, m, nx, ny, radial, amb = struct.unpack("<6I", fh.read(24))
            if ver != VERSION:
                raise SolverError(f"{path}: unsupported snapshot version {ver}")
            if (nx, ny, bool(radial), amb) != (grid.Nx, grid.Ny, grid.radial,
                                               grid.ambient_n):
                raise SolverError(f"{path}: snapshot does not match the grid")
            s = np.frombuffer(fh.read(8 * m), dtype="<f8").copy()
            orders = FractionalOrders(s)
            shape = FieldSet.grid_shape(grid)
            count = int(np.prod(shape))
            vals = [
                np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape).copy()
                for _ in range(m)
            ]
        return FieldSet(tuple(vals), grid, orders)


@dataclass
class SolveReport:
    outer_iterations: int = 0
    residual_history: list = field(default_factory=list)
    converged: bool = False
    linear_solve_iterations_total: int = 0
    linear_solver: str = "direct"
    fallback_steps: int = 0
    energy_history: list = field(default_factory=list)


@dataclass(frozen=True)
class BoundaryData:
    """Lateral data for the nonlinear solve.

    alpha/beta: limit states clamped on the left/right lateral columns of a
    slab grid (beta alone on the outer column in radial mode).  exact: full
    node arrays, one per component, clamped on lateral and top Dirichlet
    nodes instead (used for validation against closed forms).  top is
    "neumann" (homogeneous, the default) or "dirichlet" (needs exact data).
    """

    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    exact: tuple | None = None
    top: str = "neumann"


# ---------------------------------------------------------------------------
# operator assembly

def _graph_laplacian(n: int, p: np.ndarray, q: np.ndarray, t: np.ndarray):
    rows = np.concatenate([p, q, p, q])
    cols = np.concatenate([p, q, q, p])
    data = np.concatenate([t, t, -t, -t])
    return sp.csr_array(sp.coo_array((data, (rows, cols)), shape=(n, n)))


def assemble_operator(grid: HalfSpaceGrid, a: float):
    """Stiffness of the weighted Dirichlet form int y^a |grad v|^2 (pure Neumann).

    Symmetric positive semidefinite with constants in the kernel; boundary
    conditions are imposed afterwards by row/column reduction.
    """
    if not -1.0 < a < 1.0:
        raise GridError(f"weight exponent must lie in (-1,1), got {a}")
    shape = FieldSet.grid_shape(grid)
    n = int(np.prod(shape))
    node = np.arange(n).reshape(shape)
    my = grid.y_cell_moments(a)
    ty = grid.y_transmissibility(a)
    mx = grid.x_cell_measures()
    fx = grid.x_face_metric() / grid.hx

    parts = []
    if grid.boundary_dim == 1:
        t = np.multiply.outer(mx, ty)
        parts.append((node[:, :-1], node[:, 1:], t))
        t = np.multiply.outer(fx, my)
        parts.append((node[:-1, :], node[1:, :], t))
    else:
        t = np.einsum("i,j,k->ijk", mx, mx, ty)
        parts.append((node[:, :, :-1], node[:, :, 1:], t))
        t = np.einsum("i,j,k->ijk", fx, mx, my)
        parts.append((node[:-1, :, :], node[1:, :, :], t))
        t = np.einsum("i,j,k->ijk", mx, fx, my)
        parts.append((node[:, :-1, :], node[:, 1:, :], t))
    p = np.concatenate([pp.ravel() for pp, _, _ in parts])
    q = np.concatenate([qq.ravel() for _, qq, _ in parts])
    t = np.concatenate([tt.ravel() for _, _, tt in parts])
    return _graph_laplacian(n, p, q, t)


def _assemble_periodic(grid: HalfSpaceGrid, a: float):
    """Stiffness on the Nx-1 unique columns of an x-periodic slab."""
    if grid.boundary_dim != 1 or grid.radial:
        raise GridError("periodic assembly needs a 1-D slab grid")
    nxu = grid.Nx - 1
    ny1 = grid.Ny + 1
    n = nxu * ny1
    node = np.arange(n).reshape(nxu, ny1)
    my = grid.y_cell_moments(a)
    ty = grid.y_transmissibility(a)
    hx = grid.hx
    parts = [
        (node[:, :-1], node[:, 1:], np.multiply.outer(np.full(nxu, hx), ty)),
        (node[:-1, :], node[1:, :], np.broadcast_to(my / hx, (nxu - 1, ny1))),
        (node[-1:, :], node[:1, :], np.broadcast_to(my / hx, (1, ny1))),
    ]
    p = np.concatenate([pp.ravel() for pp, _, _ in parts])
    q = np.concatenate([qq.ravel() for _, qq, _ in parts])
    t = np.concatenate([tt.ravel() for _, _, tt in parts])
    return _graph_laplacian(n, p, q, t)


# ---------------------------------------------------------------------------
# boundary bookkeeping

def _boundary_cell_measures(grid: HalfSpaceGrid) -> np.ndarray:
    """Measure of each y = 0 control cell in the boundary slab."""
    mx = grid.x_cell_measures()
    if grid.boundary_dim == 2:
        return np.multiply.outer(mx, mx)
    return mx


def _dirichlet_mask(grid: HalfSpaceGrid, bc: BoundaryData) -> np.ndarray:
    shape = FieldSet.grid_shape(grid)
    mask = np.zeros(shape, dtype=bool)
    if grid.boundary_dim == 2:
        mask[0, :, :] = mask[-1, :, :] = True
        mask[:, 0, :] = mask[:, -1, :] = True
    elif grid.radial:
        mask[-1, :] = True
    else:
        mask[0, :] = mask[-1, :] = True
    if bc.top == "dirichlet":
        if bc.exact is None:
            raise SolverError("top Dirichlet condition needs exact data")
        mask[..., -1] = True
    elif bc.top != "neumann":
        raise SolverError(f"unknown top condition {bc.top!r}")
    return mask


def _dirichlet_values(grid, bc: BoundaryData, i: int) -> np.ndarray:
    shape = FieldSet.grid_shape(grid)
    if bc.exact is not None:
        g = np.asarray(bc.exact[i], dtype=float)
        if g.shape != shape:
            raise SolverError("exact boundary data does not match the grid")
        return g
    g = np.zeros(shape)
    if grid.boundary_dim == 2:
        raise SolverError("2-D boundary solves need exact lateral data")
    if grid.radial:
        if bc.beta is None:
            raise SolverError("radial solve needs the outer value (beta)")
        g[-1, :] = np.asarray(bc.beta, dtype=float)[i]
    else:
        if bc.alpha is None or bc.beta is None:
            raise SolverError("slab solve needs both lateral states")
        g[0, :] = np.asarray(bc.alpha, dtype=float)[i]
        g[-1, :] = np.asarray(bc.beta, dtype=float)[i]
    return g


# ---------------------------------------------------------------------------
# nonlinear solve

def _discrete_energy(vs, ops, orders, mu_b, H):
    e = 0.0
    for i, v in enumerate(vs):
        f = v.ravel()
        e += 0.5 / orders.d[i] * float(f @ (ops[i] @ f))
    tr = np.stack([v[..., 0] for v in vs], axis=-1)
    return e - float(np.sum(mu_b * H.value(tr)))


def solve_coupled(
    grid: HalfSpaceGrid,
    orders: FractionalOrders,
    H: NonlinearitySpec,
    bc: BoundaryData,
    initial: FieldSet,
    newton_tol: float = 1e-10,
    newton_max: int = 60,
    krylov_tol: float = 1e-10,
    krylov_max: int = 10000,
    damping: bool = True,
):
    """Newton solve of div(y^a_i grad v_i) = 0 with flux d_i dH/dv_i at y = 0.

    Converged means the sup-norm of the discrete flux-balance residual at the
    free nodes is at most newton_tol.  Returns the last iterate either way;
    the report carries the verdict.
    """
    m = orders.m
    if H.m != m or initial.m != m:
        raise SolverError("orders, nonlinearity and initial field disagree on m")
    shape = FieldSet.grid_shape(grid)
    n = int(np.prod(shape))
    ops = [assemble_operator(grid, float(orders.a[i])) for i in range(m)]
    mu_b = _boundary_cell_measures(grid)
    mask = _dirichlet_mask(grid, bc)
    free = ~mask.ravel()
    bidx = np.zeros(shape, dtype=bool)
    bidx[..., 0] = True
    brows = np.where(bidx.ravel())[0]

    vs = [v.copy() for v in initial.values]
    for i in range(m):
        g = _dirichlet_values(grid, bc, i)
        vs[i][mask] = g[mask]

    direct = grid.boundary_dim == 1
    report = SolveReport(linear_solver="direct" if direct else "cg")

    def residual(vlist):
        out = []
        tr = np.stack([v[..., 0] for v in vlist], axis=-1)
        grad = H.gradient(tr)
        for i in range(m):
            r = (ops[i] @ vlist[i].ravel()).reshape(shape)
            r[..., 0] -= orders.d[i] * mu_b * grad[..., i]
            r = r.ravel()
            r[~free] = 0.0
            out.append(r)
        return out

    def supnorm(rs):
        return max(float(np.max(np.abs(r))) for r in rs)

    res = residual(vs)
    norm = supnorm(res)
    report.residual_history.append(norm)
    report.energy_history.append(_discrete_energy(vs, ops, orders, mu_b, H))

    for it in range(newton_max):
        if norm <= newton_tol:
            report.converged = True
            break
        report.outer_iterations = it + 1

        # symmetric energy-scaled Jacobian: blockdiag(K_i/d_i) - boundary Hessian
        tr = np.stack([v[..., 0] for v in vs], axis=-1)
        hess = H.hessian(tr)
        blocks = [[None] * m for _ in range(m)]
        for i in range(m):
            blocks[i][i] = ops[i] * (1.0 / orders.d[i])
        for i in range(m):
            for j in range(m):
                w = (mu_b * hess[..., i, j]).ravel()
                coup = sp.csr_array(
                    sp.coo_array((w, (brows,) * 2), shape=(n, n)))
                blocks[i][j] = coup * -1.0 if blocks[i][j] is None \
                    else blocks[i][j] - coup
        S = sp.csr_array(sp.bmat(blocks, format="csr"))

        freeall = np.concatenate([free] * m)
        Sff = S[freeall][:, freeall]
        rhs = np.concatenate([res[i] / orders.d[i] for i in range(m)])[freeall]

        if direct:
            try:
                lu = spla.splu(sp.csc_matrix(Sff))
            except RuntimeError as exc:
                raise JacobianError(f"singular Newton linearization: {exc}")
            delta_f = lu.solve(-rhs)
            report.linear_solve_iterations_total += 1
        else:
            dpre = Sff.diagonal()
            dpre = np.where(np.abs(dpre) > 0, dpre, 1.0)
            M = spla.LinearOperator(Sff.shape, matvec=lambda z: z / dpre)
            count = [0]

            def cb(_):
                count[0] += 1

            delta_f, info = spla.cg(Sff, -rhs, rtol=krylov_tol, atol=0.0,
                                    maxiter=krylov_max, M=M, callback=cb)
            report.linear_solve_iterations_total += count[0]
            if info != 0:
                # indefinite or stalled; MINRES handles the symmetric case
                report.fallback_steps += 1
                report.linear_solver = "cg+minres"
                delta_f, info = spla.minres(Sff, -rhs, rtol=krylov_tol,
                                            maxiter=krylov_max, M=M)
                if info != 0:
                    raise JacobianError("inner linear solve failed to converge")

        delta = np.zeros(m * n)
        delta[freeall] = delta_f
        deltas = [delta[k * n:(k + 1) * n].reshape(shape) for k in range(m)]

        t = 1.0
        accepted = False
        while t >= 1.0 / 4096.0:
            trial = [vs[i] + t * deltas[i] for i in range(m)]
            tres = residual(trial)
            tnorm = supnorm(tres)
            if tnorm <= (1.0 - 1e-4 * t) * norm or not damping:
                vs, res, norm = trial, tres, tnorm
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        report.residual_history.append(norm)
        report.energy_history.append(_discrete_energy(vs, ops, orders, mu_b, H))
    else:
        report.converged = norm <= newton_tol

    if norm <= newton_tol:
        report.converged = True
    return FieldSet(tuple(vs), grid, orders), report


def solve_radial(grid, ambient_n, orders, H, bc, initial, **kwargs):
    """Radial solve: same Newton contract with the r^(n-1) metric built in."""
    if not grid.radial:
        raise SolverError("solve_radial needs a radial grid")
    if grid.ambient_n != ambient_n:
        raise SolverError("ambient dimension does not match the grid")
    return solve_coupled(grid, orders, H, bc, initial, **kwargs)


# ---------------------------------------------------------------------------
# linear extension and trace flux

def layer_profile(grid: HalfSpaceGrid, a: float,
                  alpha: float = -1.0, beta: float = 1.0,
                  angle: float | None = None) -> np.ndarray:
    """Self-similar far field of a transition layer.

    The bounded degree-zero solution of div(y^a grad v) = 0 taking the
    values beta (x -> +inf) and alpha (x -> -inf) depends only on the polar
    angle t and solves (sin(t)^a G')' = 0, so G is the normalized
    antiderivative of sin(t)^(-a), a regularized incomplete beta function
    in the variable sin^2 t.  Evaluating it at the angle of (x, 1 + y)
    keeps it smooth down to y = 0; the unit offset perturbs the weight by
    O(1/distance), so the field is the correct far-field shape of a layer
    (exact everywhere at a = 0, where it reduces to
    (2/pi) atan(x / (1 + y))).  Used as truncation data and Newton seed for
    layer solves.  On a 2-D boundary the layer runs along the unit
    direction (cos(angle), sin(angle)).
    """
    if grid.radial:
        raise SolverError("layer data needs a non-radial boundary")
    from scipy.special import betainc

    if grid.boundary_dim == 2:
        if angle is None:
            raise SolverError("2-D layer data needs a direction angle")
        x1, x2, ym = np.meshgrid(grid.x, grid.x, grid.y, indexing="ij")
        xm = np.cos(angle) * x1 + np.sin(angle) * x2
    else:
        xm, ym = np.meshgrid(grid.x, grid.y, indexing="ij")
    theta = np.arctan2(1.0 + ym, xm)
    half = 0.5 * betainc(0.5 * (1.0 - a), 0.5, np.sin(theta) ** 2)
    frac = np.where(theta <= 0.5 * np.pi, half, 1.0 - half)
    return alpha + (beta - alpha) * (1.0 - frac)


def harmonic_extension(trace, s: float, grid: HalfSpaceGrid,
                       exact=None, periodic: bool = False) -> FieldSet:
    """Weighted-harmonic extension of boundary data (single component).

    Dirichlet data on y = 0; homogeneous Neumann on top and lateral
    truncations unless exact far-field node values are supplied or the slab
    is declared x-periodic.
    """
    orders = FractionalOrders(np.array([float(s)]))
    a = float(orders.a[0])
    trace = np.asarray(trace, dtype=float)
    shape = FieldSet.grid_shape(grid)
    if trace.shape != shape[:-1]:
        raise SolverError("trace does not match the boundary slab")

    if periodic:
        if exact is not None:
            raise SolverError("periodic mode has no lateral data to clamp")
        nxu = grid.Nx - 1
        ny1 = grid.Ny + 1
        K = _assemble_periodic(grid, a)
        mask = np.zeros((nxu, ny1), dtype=bool)
        mask[:, 0] = True
        g = np.zeros((nxu, ny1))
        g[:, 0] = trace[:nxu]
        v = _linear_dirichlet_solve(K, mask, g)
        full = np.empty(shape)
        full[:nxu] = v
        full[-1] = v[0]
        return FieldSet((full,), grid, orders)

    K = assemble_operator(grid, a)
    mask = np.zeros(shape, dtype=bool)
    mask[..., 0] = True
    g = np.zeros(shape)
    g[..., 0] = trace
    if exact is not None:
        exact = np.asarray(exact, dtype=float)
        if exact.shape != shape:
            raise SolverError("exact data does not match the grid")
        if grid.boundary_dim == 2:
            lat = np.zeros(shape, dtype=bool)
            lat[0], lat[-1], lat[:, 0], lat[:, -1] = True, True, True, True
        else:
            lat = np.zeros(shape, dtype=bool)
            lat[0], lat[-1] = True, True
        lat[..., -1] = True
        mask |= lat
        g[lat] = exact[lat]
    v = _linear_dirichlet_solve(K, mask, g)
    return FieldSet((v,), grid, orders)


def _linear_dirichlet_solve(K, mask, g):
    shape = mask.shape
    free = ~mask.ravel()
    v = g.ravel().copy()
    rhs = -(K @ v)[free]
    Kff = K[free][:, free]
    v[free] = spla.splu(sp.csc_matrix(Kff)).solve(rhs)
    return v.reshape(shape)


def dtn(v: FieldSet, grid: HalfSpaceGrid | None = None,
        orders: FractionalOrders | None = None):
    """Trace flux -lim_{y->0} y^a dv/dy per component.

    The limit is read off a least-squares fit of v(., y) - v(., 0) against the
    boundary expansion c*y^(1-a) + e*y^2 on the first three off-boundary
    nodes; the flux is -(1-a)c, the coefficient that pairs with d_s times the
    fractional Laplacian of the trace.
    """
    grid = v.grid if grid is None else grid
    orders = v.orders if orders is None else orders
    y = grid.y[1:4]
    if y.size < 3:
        raise SolverError("flux fit needs at least three off-boundary nodes")
    out = []
    for i in range(orders.m):
        a = float(orders.a[i])
        A = np.stack([y ** (1.0 - a), y ** 2], axis=1)
        scale = np.linalg.norm(A, axis=0)
        cond = np.linalg.cond(A / scale)
        if cond > DTN_COND_LIMIT:
            raise SolverError(
                f"flux fit ill-conditioned (cond {cond:.2e}); refine the "
                "y-grading (raise gamma or Ny)"
            )
        rhs = (v.values[i][..., 1:4] - v.values[i][..., :1])
        coef, *_ = np.linalg.lstsq(A, rhs.reshape(-1, 3).T, rcond=None)
        c = coef[0].reshape(v.values[i].shape[:-1])
        out.append(-(1.0 - a) * c)
    return out
