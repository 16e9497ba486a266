"""Stability inequality, linearized spectrum and Liouville-type checks.

The quadratic forms reuse the finite-volume stiffness, so at a converged
solve the tested form is exactly the Hessian structure of the discrete
energy.  The generalized eigenproblem against boundary mass is reduced by a
Schur complement onto the y = 0 unknowns, where the mass is positive
definite; interior blocks are factorized once per component.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import HalfSpaceGrid
from .nonlinearity import NonlinearitySpec
from .orders import FractionalOrders
from .solver import FieldSet, assemble_operator

__all__ = [
    "StabilityReport",
    "cutoff_family",
    "stability_gap",
    "linearized_spectrum",
    "poincare_reduction_slack",
    "sigma_residual",
    "liouville_growth",
    "bounded_energy_check",
    "dichotomy_check",
    "kterm_identity",
]


class StabilityError(ValueError):
    pass


@dataclass
class StabilityReport:
    quadratic_gap: float = np.nan
    smallest_eigenvalue: float = np.nan
    eigenvector_sign_consistent: bool = False
    family: str = ""
    details: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# quadratic forms

def _dirichlet_form(v: FieldSet, zetas, orders) -> float:
    """sum_i int y^{a_i} |grad zeta_i|^2 via the finite-volume stiffness."""
    total = 0.0
    for i, z in enumerate(zetas):
        K = assemble_operator(v.grid, float(orders.a[i]))
        f = z.ravel()
        total += float(f @ (K @ f))
    return total


def _boundary_form(v: FieldSet, zetas, H, orders) -> float:
    """sum_ij sqrt(d_i d_j) int_{y=0} H_ij(v) zeta_i zeta_j."""
    grid = v.grid
    hess = H.hessian(v.traces())
    wb = grid.boundary_weights()
    total = 0.0
    for i in range(v.m):
        for j in range(v.m):
            sij = np.sqrt(orders.d[i] * orders.d[j])
            total += sij * float(
                np.sum(wb * hess[..., i, j] * zetas[i][..., 0] * zetas[j][..., 0]))
    return total


def _check_support(grid: HalfSpaceGrid, z: np.ndarray):
    edge = np.abs(z[0]).max() + np.abs(z[-1]).max() + np.abs(z[..., -1]).max()
    if grid.boundary_dim == 2:
        edge += np.abs(z[:, 0]).max() + np.abs(z[:, -1]).max()
    if edge > 0.0:
        raise StabilityError("test function must vanish on the truncation boundary")


def cutoff_family(grid: HalfSpaceGrid, scales: int = 5):
    """Smooth radial bumps at dyadic scales, vanishing on the truncation.

    Scale k covers radius R_k = R_max / 2^k with the profile cos^2 of the
    scaled distance; the widest one reaches 95% of the representable box.
    """
    if grid.boundary_dim == 2:
        x1, x2, y = np.meshgrid(grid.x, grid.x, grid.y, indexing="ij")
        rho = np.sqrt(x1 ** 2 + x2 ** 2 + y ** 2)
    else:
        x, y = np.meshgrid(grid.x, grid.y, indexing="ij")
        rho = np.hypot(x, y)
    rmax = 0.95 * min(grid.L, grid.Y)
    out = []
    for k in range(scales):
        rk = rmax / 2 ** k
        eta = np.where(rho < rk, np.cos(0.5 * np.pi * rho / rk) ** 2, 0.0)
        out.append(eta)
    return out


def stability_gap(v: FieldSet, H: NonlinearitySpec, orders: FractionalOrders,
                  tests=None) -> StabilityReport:
    """Worst gap of the stability inequality over a test-function family.

    gap(zeta) = sum_i int y^{a_i}|grad zeta_i|^2
              - sum_ij sqrt(d_i d_j) int_{y=0} H_ij(v) zeta_i zeta_j,
    minimized over the family.  Default family: zeta_i = dv_i/dx times the
    dyadic cutoff bumps (the translation mode is the continuum null
    direction, so this is the sharpest cheap test).
    """
    grid = v.grid
    if tests is None:
        gx = [grid.gradients(v.values[i])[0] for i in range(v.m)]
        family = []
        for eta in cutoff_family(grid):
            family.append(tuple(gx[i] * eta for i in range(v.m)))
        name = "dx-times-dyadic-cutoffs"
    else:
        family = list(tests)
        name = "user"
    gaps = []
    for zetas in family:
        for z in zetas:
            _check_support(grid, z)
        gaps.append(_dirichlet_form(v, zetas, orders)
                    - _boundary_form(v, zetas, H, orders))
    rep = StabilityReport(quadratic_gap=float(min(gaps)), family=name,
                          details={"gaps": gaps})
    return rep


def poincare_reduction_slack(v: FieldSet, H: NonlinearitySpec,
                             orders: FractionalOrders) -> float:
    """Surviving terms of the geometric inequality on a 1-D boundary.

    With point level sets the curvature and tangential terms vanish and the
    inequality reduces to
      sum_i (1/d_i) int y^{a_i} |dv_i/dx|^2 |grad eta_i|^2
      >= sum_{i != j} int_{y=0} (|psi_i||psi_j| eta_i eta_j
                                 - psi_i psi_j eta_i^2) H_ij(v),
    psi_i = dv_i/dx.  Returns the minimum slack (lhs - rhs) over pairs of
    dyadic cutoffs used as (eta_i) patterns.
    """
    grid = v.grid
    if grid.boundary_dim != 1 or grid.radial:
        raise StabilityError("the reduced inequality needs a 1-D slab")
    gx = [grid.gradients(v.values[i])[0] for i in range(v.m)]
    hess = H.hessian(v.traces())
    wb = grid.boundary_weights()
    cuts = cutoff_family(grid)
    slacks = []
    for ea in cuts:
        for eb in cuts:
            etas = [ea if i % 2 == 0 else eb for i in range(v.m)]
            lhs = 0.0
            for i in range(v.m):
                ge = grid.gradients(etas[i])
                gsq = ge[0] ** 2 + ge[1] ** 2
                w = grid.bulk_weights(float(orders.a[i]), "full")
                lhs += float(np.sum(w * gx[i] ** 2 * gsq)) / orders.d[i]
            rhs = 0.0
            for i in range(v.m):
                for j in range(v.m):
                    if i == j:
                        continue
                    pi, pj = gx[i][:, 0], gx[j][:, 0]
                    ei, ej = etas[i][:, 0], etas[j][:, 0]
                    rhs += float(np.sum(
                        wb * (np.abs(pi) * np.abs(pj) * ei * ej
                              - pi * pj * ei ** 2) * hess[:, i, j]))
            slacks.append(lhs - rhs)
    return float(min(slacks))


# ---------------------------------------------------------------------------
# linearized spectrum

def linearized_spectrum(v: FieldSet, H: NonlinearitySpec,
                        orders: FractionalOrders, k: int = 3) -> StabilityReport:
    """Smallest Rayleigh values of the linearized boundary eigenproblem.

    Minimizes [sum_i int y^{a_i}|grad p_i|^2
               - sum_ij sqrt(d_i d_j) int_{y=0} H_ij p_i p_j]
    over sum_i int_{y=0} p_i^2 = 1 with p vanishing on the truncation
    boundary.  The boundary mass is singular on interior nodes, so the form
    is Schur-reduced onto the y = 0 unknowns (interior blocks factorized per
    component) and the dense small problem is solved by a Lanczos iteration.
    """
    grid = v.grid
    m = v.m
    shape = FieldSet.grid_shape(grid)
    n = int(np.prod(shape))

    # free nodes: everything except the truncation boundary
    mask = np.zeros(shape, dtype=bool)
    mask[0] = mask[-1] = True
    mask[..., -1] = True
    if grid.boundary_dim == 2:
        mask[:, 0] = mask[:, -1] = True
    free = ~mask.ravel()

    bnd = np.zeros(shape, dtype=bool)
    bnd[..., 0] = True
    bnd_free = bnd.ravel() & free
    int_free = (~bnd.ravel()) & free
    bsel = np.where(bnd_free[free])[0]
    isel = np.where(int_free[free])[0]
    nb, ni = bsel.size, isel.size

    Ks = [assemble_operator(grid, float(orders.a[i])) for i in range(m)]
    Kff = [K[free][:, free] for K in Ks]
    Kbb = [K[bsel][:, bsel] for K in Kff]
    Kbi = [K[bsel][:, isel] for K in Kff]
    Kii = [sp.csc_matrix(K[isel][:, isel]) for K in Kff]
    lus = [spla.splu(K) for K in Kii]

    hess = H.hessian(v.traces())
    wb = grid.boundary_weights()
    # boundary weights ordered like the y=0 nodes; restrict to free ones
    bmask_slab = np.ones(wb.shape, dtype=bool)
    bmask_slab[0] = bmask_slab[-1] = False
    if grid.boundary_dim == 2:
        bmask_slab[:, 0] = bmask_slab[:, -1] = False
    wfree = wb[bmask_slab]
    hfree = hess[bmask_slab]

    sqd = np.sqrt(orders.d)
    msqrt = 1.0 / np.sqrt(wfree)

    def schur_matvec(z):
        # z lives on the m * nb boundary unknowns, mass-normalized
        zb = (z.reshape(m, nb) * msqrt)
        out = np.empty_like(zb)
        for i in range(m):
            out[i] = Kbb[i] @ zb[i] - Kbi[i] @ lus[i].solve(Kbi[i].T @ zb[i])
        for i in range(m):
            coup = np.zeros(nb)
            for j in range(m):
                coup += sqd[i] * sqd[j] * wfree * hfree[:, i, j] * zb[j]
            out[i] -= coup
        return (out * msqrt).ravel()

    A = spla.LinearOperator((m * nb, m * nb), matvec=schur_matvec)
    try:
        vals, vecs = spla.eigsh(A, k=min(k, m * nb - 2), which="SA",
                                maxiter=5000)
    except spla.ArpackNoConvergence as exc:
        rep = StabilityReport()
        rep.details["error"] = f"eigen-iteration did not converge: {exc}"
        return rep

    order = np.argsort(vals)
    lam = float(vals[order[0]])
    zb = (vecs[:, order[0]].reshape(m, nb) * msqrt)
    consistent = True
    for i in range(m):
        pb = zb[i]
        pint = -lus[i].solve(Kbi[i].T @ pb)
        comp = np.concatenate([pb, pint])
        big = np.abs(comp) > 1e-8 * np.max(np.abs(comp))
        if np.any(comp[big] > 0) and np.any(comp[big] < 0):
            consistent = False
    return StabilityReport(smallest_eigenvalue=lam,
                           eigenvector_sign_consistent=consistent,
                           family="boundary-rayleigh",
                           details={"eigenvalues": [float(x) for x in
                                                    vals[order]]})


# ---------------------------------------------------------------------------
# quotient fields

def _weighted_operator_with_density(grid: HalfSpaceGrid, a: float,
                                    rho: np.ndarray):
    """Stiffness of int y^a rho |grad sigma|^2 with rho sampled at nodes.

    Face densities are arithmetic means of the adjacent node values; only
    1-D boundary grids are supported.
    """
    from .solver import _graph_laplacian  # shared assembly core

    shape = (grid.Nx, grid.Ny + 1)
    n = grid.Nx * (grid.Ny + 1)
    node = np.arange(n).reshape(shape)
    my = grid.y_cell_moments(a)
    ty = grid.y_transmissibility(a)
    mx = grid.x_cell_measures()
    fx = grid.x_face_metric() / grid.hx
    rv = 0.5 * (rho[:, :-1] + rho[:, 1:])
    rh = 0.5 * (rho[:-1, :] + rho[1:, :])
    tv = np.multiply.outer(mx, ty) * rv
    th = np.multiply.outer(fx, my) * rh
    p = np.concatenate([node[:, :-1].ravel(), node[:-1, :].ravel()])
    q = np.concatenate([node[:, 1:].ravel(), node[1:, :].ravel()])
    t = np.concatenate([tv.ravel(), th.ravel()])
    return _graph_laplacian(n, p, q, t)


def sigma_residual(v: FieldSet, phi: FieldSet, H: NonlinearitySpec,
                   orders: FractionalOrders, direction=None) -> dict:
    """Residuals of the quotient system sigma_i = psi_i / phi_i.

    psi_i is the directional derivative of v_i along the boundary direction
    (the x axis on 1-D grids).  Checks the interior equation
    div(y^{a_i} phi_i^2 grad sigma_i) = 0 and the boundary relation
    -lim y^{a_i} phi_i^2 dsigma_i/dy
        = d_i sum_j H_ij phi_i phi_j (sigma_j - sigma_i).
    """
    grid = v.grid
    if grid.boundary_dim != 1 or grid.radial:
        raise StabilityError("quotient residuals are computed on 1-D slabs")
    # trusted window: central 60% in x, lower half in y (the top corner rows
    # carry the truncation artifact of the derivative fields)
    win = slice(grid.Nx // 5, 4 * grid.Nx // 5)
    jtop = int(np.searchsorted(grid.y, 0.5 * grid.Y))
    psis = [grid.gradients(v.values[i])[0] for i in range(v.m)]
    sigmas = []
    for i in range(v.m):
        p = phi.values[i]
        pw = p[win, :jtop]
        if np.min(pw) * np.max(pw) < 0:
            raise StabilityError(
                "phi changes sign on the trusted window: the positivity "
                "hypothesis fails")
        sigmas.append(np.divide(psis[i], p, out=np.zeros_like(p),
                                where=p != 0))

    interior_sup = 0.0
    boundary_sup = 0.0
    hess = H.hessian(v.traces())
    tr_sigma = np.stack([s[:, 0] for s in sigmas], axis=-1)
    tr_phi = np.stack([phi.values[i][:, 0] for i in range(v.m)], axis=-1)
    for i in range(v.m):
        a = float(orders.a[i])
        rho = phi.values[i] ** 2
        K = _weighted_operator_with_density(grid, a, rho)
        r = (K @ sigmas[i].ravel()).reshape(grid.Nx, grid.Ny + 1)
        # normalize flux imbalances by the cell measure scale
        denom = np.multiply.outer(grid.x_cell_measures(),
                                  grid.y_cell_moments(a))
        rin = r[win, 1:jtop] / np.maximum(denom[win, 1:jtop], 1e-300)
        interior_sup = max(interior_sup, float(np.max(np.abs(rin))))

        # boundary flux by the same expansion fit as the trace flux
        y = grid.y[1:4]
        A = np.stack([y ** (1.0 - a), y ** 2], axis=1)
        dsig = sigmas[i][:, 1:4] - sigmas[i][:, :1]
        coef, *_ = np.linalg.lstsq(A, dsig.T, rcond=None)
        fl = -(1.0 - a) * coef[0] * rho[:, 0]
        rhs = np.zeros(grid.Nx)
        for j in range(v.m):
            rhs += (orders.d[i] * hess[:, i, j] * tr_phi[:, i] * tr_phi[:, j]
                    * (tr_sigma[:, j] - tr_sigma[:, i]))
        boundary_sup = max(boundary_sup,
                           float(np.max(np.abs((fl - rhs)[win]))))
    variance = max(float(np.var(s[win, :jtop])) for s in sigmas)
    return {"interior_sup": interior_sup, "boundary_sup": boundary_sup,
            "sigma_variance": variance}


GROWTH_TAGS = ("log", "power")


def liouville_growth(sigma, phi, orders: FractionalOrders, grid: HalfSpaceGrid,
                     F: str, R_list, power: float = 0.0) -> dict:
    """Scaled growth curve R -> (1/(R^2 F(R))) int_{C_R} sum y^{a_i} phi_i^2 sigma_i^2.

    F must belong to the admissible class: nondecreasing with divergent
    integral of 1/(r F(r)).  The logarithm qualifies; powers r^p with p > 0
    do not (their reciprocal integral converges) and are refused.
    """
    if F not in GROWTH_TAGS:
        raise StabilityError(f"unknown growth tag {F!r}")
    if F == "power" and power > 0.0:
        raise StabilityError(
            "r^p with p > 0 is outside the admissible class: the integral "
            "of 1/(r F(r)) converges")
    if F == "power" and power < 0.0:
        raise StabilityError("a decreasing F is outside the admissible class")
    R = np.asarray(R_list, dtype=float)
    vals = np.empty(R.size)
    for k, r in enumerate(R):
        total = 0.0
        for i in range(len(sigma)):
            f = phi[i] ** 2 * sigma[i] ** 2
            w = grid.bulk_weights(float(orders.a[i]), "cylinder", float(r))
            total += float(np.sum(w * f))
        fr = np.log(r) if F == "log" else r ** power
        if fr <= 0:
            raise StabilityError("F(R) must be positive on the R list")
        vals[k] = total / (r ** 2 * fr)
    top = vals[3 * R.size // 4:]
    satisfied = bool(np.all(np.isfinite(vals))
                     and (top.size < 2 or top[-1] <= top[0] * (1 + 1e-8)))
    return {"R": R, "curve": vals, "sup": float(np.max(vals)),
            "hypothesis_satisfied": satisfied}


# ---------------------------------------------------------------------------
# energy bound, dichotomy, algebraic identity

def bounded_energy_check(v: FieldSet, orders: FractionalOrders, R_list,
                         grad_H_nonnegative: bool = False) -> dict:
    """Per-component fit of the half-ball Dirichlet growth against R^(n-2s_i)."""
    grid = v.grid
    n = grid.n_eff
    R = np.asarray(R_list, dtype=float)
    grads = [grid.gradients(v.values[i]) for i in range(v.m)]
    exps, slacks = [], []
    for i in range(v.m):
        gsq = sum(g ** 2 for g in grads[i])
        vals = np.array([
            float(np.sum(grid.bulk_weights(float(orders.a[i]), "halfball",
                                           float(r)) * gsq)) for r in R])
        upper = slice(R.size // 2, None)
        if np.all(vals[upper] > 0):
            lr, lv = np.log(R[upper]), np.log(vals[upper])
            slope = float(np.polyfit(lr, lv, 1)[0])
        else:
            slope = -np.inf  # integrals vanish: trivially bounded
        exps.append(slope)
        slacks.append(slope - (n - 2.0 * float(orders.s[i])))
    return {"exponents": exps, "slack": slacks,
            "applicable": bool(grad_H_nonnegative), "R": R}


def dichotomy_check(v: FieldSet, rel_tol: float = 1e-8,
                    margin: float = 0.1) -> list:
    """Classify each trace derivative: identically-flat, strictly-one-signed
    or mixed (the latter on a converged stable solution is a red flag).

    Works on the interior window (truncation margins clipped at the rate of
    the other residual checks).  One-signed means no derivative of the
    opposite sign above the noise floor rel_tol times the trace scale; far
    tails may sit below the floor without spoiling the tag.
    """
    grid = v.grid
    if grid.boundary_dim != 1 or grid.radial:
        raise StabilityError("the dichotomy concerns 1-D boundary traces")
    k = int(margin * grid.Nx)
    win = slice(k, grid.Nx - k)
    tags = []
    for i in range(v.m):
        d = np.gradient(v.trace(i), grid.x)[win]
        scale = max(float(np.max(np.abs(v.trace(i)))), 1e-300)
        tol = rel_tol * scale
        if np.all(np.abs(d) <= tol):
            tags.append("identically-flat")
        elif np.all(d >= -tol) or np.all(d <= tol):
            tags.append("strictly-one-signed")
        else:
            tags.append("mixed")
    return tags


def kterm_identity(h: np.ndarray, sigma: np.ndarray, f=None) -> float:
    """Defect of the antisymmetrization identity
    sum_ij h_ij sigma_i f(sigma_j - sigma_i)
      = - sum_{i<j} h_ij (sigma_j - sigma_i) f(sigma_j - sigma_i)
    for symmetric h; with h >= 0 and f odd nondecreasing the right side is
    nonpositive, the sign mechanism behind the quotient-field rigidity."""
    if f is None:
        f = lambda t: t
    h = np.asarray(h, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    m = sigma.size
    if h.shape != (m, m) or not np.allclose(h, h.T, atol=0, rtol=0):
        raise StabilityError("h must be symmetric and match sigma")
    lhs = 0.0
    for i in range(m):
        for j in range(m):
            lhs += h[i, j] * sigma[i] * f(sigma[j] - sigma[i])
    rhs = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            rhs -= h[i, j] * (sigma[j] - sigma[i]) * f(sigma[j] - sigma[i])
    return float(lhs - rhs)
