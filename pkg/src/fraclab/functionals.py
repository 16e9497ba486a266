"""Energy functionals and conservation-law checks on computed fields.

Everything here evaluates quantities of a solved FieldSet: the truncated
energy E_R, the fiber-integrated Hamiltonian quantity and its radial
counterpart, the scaled-energy monotonicity curve I(R) with its Pohozaev
balance, structural constraints at radial limits, decay envelopes, and the
one-dimensionality diagnostic for 2-D boundary slabs.

Sign convention for the Hamiltonian identity: integration by parts with the
flux condition -lim y^a dv/dy = d_s dH/dv gives d/dx w(x) = -d_s d/dx H(v(x,0)),
so the conserved combination is w(x) + d_s H(v(x,0)).  The residual under the
opposite sign is reported alongside for auditing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import HalfSpaceGrid, sphere_weights, unit_sphere_area
from .nonlinearity import NonlinearitySpec
from .orders import FractionalOrders
from .solver import FieldSet

__all__ = [
    "EnergyProfile",
    "HamiltonianProfile",
    "RadialHamiltonianCurve",
    "MonotonicityCurve",
    "energy",
    "energy_scan",
    "hamiltonian_profile",
    "radial_hamiltonian",
    "monotonicity_curve",
    "pohozaev_terms",
    "pohozaev_residual",
    "radial_structure_checks",
    "decay_checks",
    "symmetry_diagnostic",
]


class FunctionalError(ValueError):
    pass


def _require_equal_orders(orders: FractionalOrders):
    if not orders.equal:
        raise FunctionalError("this identity assumes a single shared order")


def _gradients(v: FieldSet):
    """List of per-component gradient tuples (d/dx..., d/dy)."""
    return [v.grid.gradients(v.values[i]) for i in range(v.m)]


def _interp(grid: HalfSpaceGrid, F: np.ndarray, xq, yq):
    """Bilinear interpolation of node samples at arbitrary (x, y) points."""
    ix = np.clip(np.searchsorted(grid.x, xq) - 1, 0, grid.Nx - 2)
    iy = np.clip(np.searchsorted(grid.y, yq) - 1, 0, grid.Ny - 1)
    x0, x1 = grid.x[ix], grid.x[ix + 1]
    y0, y1 = grid.y[iy], grid.y[iy + 1]
    tx = (xq - x0) / (x1 - x0)
    ty = (yq - y0) / (y1 - y0)
    return (F[ix, iy] * (1 - tx) * (1 - ty) + F[ix + 1, iy] * tx * (1 - ty)
            + F[ix, iy + 1] * (1 - tx) * ty + F[ix + 1, iy + 1] * tx * ty)


# ---------------------------------------------------------------------------
# energy

def energy(v: FieldSet, H: NonlinearitySpec, orders: FractionalOrders,
           R: float, grads=None) -> float:
    """Truncated energy over the cylinder B_R x (0, R).

    E_R = sum_i (1/2d_i) int_{C_R} y^{a_i} |grad v_i|^2  -  int_{B_R} H(v(.,0)).
    """
    grid = v.grid
    grads = _gradients(v) if grads is None else grads
    total = 0.0
    for i in range(v.m):
        gsq = sum(g ** 2 for g in grads[i])
        w = grid.bulk_weights(float(orders.a[i]), "cylinder", R)
        total += 0.5 / orders.d[i] * float(np.sum(w * gsq))
    wb = grid.boundary_weights(R)
    total -= float(np.sum(wb * H.value(v.traces())))
    return total


@dataclass(frozen=True)
class EnergyProfile:
    R: np.ndarray
    E: np.ndarray
    exponent: float
    coefficient: float
    fit_residual: float
    log_ratio_variation: float
    excluded: int


def energy_scan(v: FieldSet, H: NonlinearitySpec, orders: FractionalOrders,
                R_list) -> EnergyProfile:
    """E_R over increasing radii with a growth-exponent fit.

    The log-log fit uses the upper half of the R range only (growth bounds
    are asymptotic); non-positive energies are excluded with a counter.  The
    log-ratio variation max/min - 1 of E_R / log R over the same upper half
    diagnoses the borderline R^{n-1} log R rate.
    """
    R = np.asarray(R_list, dtype=float)
    if R.ndim != 1 or R.size < 4 or np.any(np.diff(R) <= 0):
        raise FunctionalError("need at least 4 strictly increasing radii")
    grads = _gradients(v)
    E = np.array([energy(v, H, orders, float(r), grads=grads) for r in R])

    upper = R >= R[R.size // 2]
    usable = upper & (E > 0.0)
    excluded = int(np.sum(upper) - np.sum(usable))
    if np.sum(usable) >= 2:
        lr, le = np.log(R[usable]), np.log(E[usable])
        A = np.stack([lr, np.ones_like(lr)], axis=1)
        coef, res, *_ = np.linalg.lstsq(A, le, rcond=None)
        exponent, logc = float(coef[0]), float(coef[1])
        fit_res = float(np.sqrt(res[0] / lr.size)) if res.size else 0.0
    else:
        exponent, logc, fit_res = math.nan, math.nan, math.nan
    ratio = E[usable] / np.log(R[usable])
    var = float(np.max(ratio) / np.min(ratio) - 1.0) if ratio.size else math.nan
    return EnergyProfile(R, E, exponent, math.exp(logc) if np.isfinite(logc)
                         else math.nan, fit_res, var, excluded)


# ---------------------------------------------------------------------------
# Hamiltonian identity (layers)

@dataclass(frozen=True)
class HamiltonianProfile:
    x: np.ndarray
    w: np.ndarray
    gap: np.ndarray
    residual_corrected: np.ndarray
    residual_printed: np.ndarray
    window: np.ndarray
    sup_corrected: float
    sup_printed: float
    balance: float


def _fiber_w(v: FieldSet, orders: FractionalOrders, grads=None) -> np.ndarray:
    """w(x) = (1/2) sum_i int y^{a} [(dv_i/dx)^2 - (dv_i/dy)^2] dy."""
    grid = v.grid
    grads = _gradients(v) if grads is None else grads
    a = float(orders.a[0])
    wy = grid.y_weights(a)
    out = np.zeros(grid.Nx)
    for i in range(v.m):
        gx, gy = grads[i]
        out += 0.5 * (gx ** 2 - gy ** 2) @ wy
    return out


def hamiltonian_profile(v: FieldSet, H: NonlinearitySpec,
                        orders: FractionalOrders) -> HamiltonianProfile:
    """Layer conservation law: w(x) + d_s [H(v(x,0)) - H(limit state)] = 0.

    Requires a 1-D slab and a single shared order.  The residual under the
    printed opposite sign, w - d_s gap, is reported for the sign audit, and
    the potential balance |H at the right end - H at the left end| checks the
    consequence H(alpha) = H(beta).
    """
    _require_equal_orders(orders)
    grid = v.grid
    if grid.boundary_dim != 1 or grid.radial:
        raise FunctionalError("the layer identity needs a 1-D slab grid")
    d = float(orders.d[0])
    w = _fiber_w(v, orders)
    tr = v.traces()
    hvals = H.value(tr)
    halpha = float(hvals[-1])  # right limit state; equals the left one for layers
    gap = d * (hvals - halpha)
    rc = w + gap
    rp = w - gap
    # central window: truncation pollutes the outer margins
    lo, hi = -0.6 * grid.L, 0.6 * grid.L
    window = np.where((grid.x >= lo) & (grid.x <= hi))[0]
    balance = abs(float(hvals[-1]) - float(hvals[0]))
    return HamiltonianProfile(
        grid.x, w, gap, rc, rp, window,
        float(np.max(np.abs(rc[window]))), float(np.max(np.abs(rp[window]))),
        balance,
    )


# ---------------------------------------------------------------------------
# radial monotone quantity

@dataclass(frozen=True)
class RadialHamiltonianCurve:
    r: np.ndarray
    curve: np.ndarray
    curve_printed: np.ndarray
    max_upward_slope: float
    scale: float
    identity_residual: float


def radial_hamiltonian(v: FieldSet, H: NonlinearitySpec,
                       orders: FractionalOrders,
                       ambient_n: int) -> RadialHamiltonianCurve:
    """Radial analogue: curve(r) = sum_i int y^a [(dv/dr)^2-(dv/dy)^2] dy
    + 2 d_s H(v(r,0)) is nonincreasing; its derivative balances the metric
    drag term 2(n-1)/r sum_i int y^a (dv/dr)^2 dy exactly.

    The opposite-sign combination is returned as curve_printed for the sign
    audit.  The identity residual is the sup over interior radii of
    |curve'(r) + 2(n-1)/r K(r)| relative to the derivative scale, with K the
    fiber integral of y^a (dv/dr)^2.
    """
    _require_equal_orders(orders)
    grid = v.grid
    if not grid.radial or grid.ambient_n != ambient_n:
        raise FunctionalError("needs the radial grid this field was solved on")
    d = float(orders.d[0])
    a = float(orders.a[0])
    grads = _gradients(v)
    wy = grid.y_weights(a)
    kin = np.zeros(grid.Nx)
    K = np.zeros(grid.Nx)
    for i in range(v.m):
        gr, gy = grads[i]
        kin += (gr ** 2 - gy ** 2) @ wy
        K += (gr ** 2) @ wy
    h = H.value(v.traces())
    curve = kin + 2.0 * d * h
    printed = kin - 2.0 * d * h

    r = grid.x
    dc = np.gradient(curve, r, edge_order=2)
    drag = np.zeros_like(r)
    drag[1:] = 2.0 * (ambient_n - 1) / r[1:] * K[1:]
    # interior radii: skip the axis (metric term singular) and the outer margin
    inner = (r > 0.1 * grid.L) & (r < 0.8 * grid.L)
    scale = float(np.max(np.abs(dc[inner]))) if np.any(inner) else 0.0
    res = float(np.max(np.abs(dc[inner] + drag[inner]))) / max(scale, 1e-300)
    slopes = np.diff(curve) / np.diff(r)
    cs = float(np.max(curve) - np.min(curve))
    return RadialHamiltonianCurve(r, curve, printed,
                                  float(np.max(slopes)), cs, res)


# ---------------------------------------------------------------------------
# monotonicity formula and Pohozaev balance

@dataclass(frozen=True)
class MonotonicityCurve:
    R: np.ndarray
    I: np.ndarray
    slopes: np.ndarray
    min_slope: float
    scale: float
    applicable: bool
    derivative_imbalance: float


def _sphere_flux_integrals(v: FieldSet, orders, R: float, grads):
    """(sum_i (1/d_i) int_{cap} y^a (dv_i/dnu)^2, sum_i (1/d_i) int y^a |grad v_i|^2)."""
    grid = v.grid
    fn, fd = 0.0, 0.0
    for i in range(v.m):
        a = float(orders.a[i])
        xs, ys, ws = sphere_weights(grid, R, a)
        gx, gy = grads[i]
        gxi = _interp(grid, gx, xs, ys)
        gyi = _interp(grid, gy, xs, ys)
        dnu = (xs * gxi + ys * gyi) / R
        fn += float(np.sum(ws * dnu ** 2)) / orders.d[i]
        fd += float(np.sum(ws * (gxi ** 2 + gyi ** 2))) / orders.d[i]
    return fn, fd


def _boundary_sphere_H(v: FieldSet, H, R: float):
    """int over the boundary sphere |x| = R of H(v(.,0))."""
    grid = v.grid
    tr = v.traces()
    if grid.radial:
        n = grid.ambient_n
        hr = float(np.interp(R, grid.x, H.value(tr)))
        return unit_sphere_area(n) * R ** (n - 1) * hr
    h = H.value(tr)
    return float(np.interp(R, grid.x, h) + np.interp(-R, grid.x, h))


def _half_ball_dirichlet(v: FieldSet, orders, R: float, grads):
    total = 0.0
    for i in range(v.m):
        gsq = sum(g ** 2 for g in grads[i])
        w = v.grid.bulk_weights(float(orders.a[i]), "halfball", R)
        total += 0.5 / orders.d[i] * float(np.sum(w * gsq))
    return total


def monotonicity_curve(v: FieldSet, H: NonlinearitySpec,
                       orders: FractionalOrders, R_list, ambient_n: int,
                       h_nonpositive: bool = True) -> MonotonicityCurve:
    """Scaled half-ball energy I(R) = R^(2s-n) [Dirichlet/2d - int_{B_R} H].

    Nondecreasing under a shared order and H <= 0 on the solution's range;
    the caller passes the H <= 0 certification and the curve is flagged
    non-applicable without it (still computed).  The derivative imbalance
    compares finite-difference slopes of I against the Pohozaev form
    R^(2s-n-1) [ (R/d) int_{cap} y^a (dv/dnu)^2 - 2s int_{B_R} H ].
    """
    _require_equal_orders(orders)
    grid = v.grid
    s = float(orders.s[0])
    n = grid.n_eff
    R = np.asarray(R_list, dtype=float)
    if R.ndim != 1 or R.size < 3 or np.any(np.diff(R) <= 0):
        raise FunctionalError("need at least 3 strictly increasing radii")
    grads = _gradients(v)
    I = np.empty(R.size)
    flux = np.empty(R.size)
    for k, r in enumerate(R):
        dirich = _half_ball_dirichlet(v, orders, float(r), grads)
        pot = float(np.sum(grid.boundary_weights(float(r))
                           * H.value(v.traces())))
        I[k] = r ** (2.0 * s - n) * (dirich - pot)
        fn, _ = _sphere_flux_integrals(v, orders, float(r), grads)
        flux[k] = r ** (2.0 * s - n - 1.0) * (r * fn - 2.0 * s * pot)
    slopes = np.diff(I) / np.diff(R)
    mid = 0.5 * (flux[:-1] + flux[1:])
    scale = float(np.max(np.abs(I)))
    denom = max(float(np.max(np.abs(mid))), 1e-300)
    imbalance = float(np.max(np.abs(slopes - mid))) / denom
    return MonotonicityCurve(R, I, slopes, float(np.min(slopes)), scale,
                             bool(h_nonpositive), imbalance)


def pohozaev_terms(v: FieldSet, H: NonlinearitySpec,
                   orders: FractionalOrders, R: float) -> dict:
    """The four terms of the dilation (Pohozaev) identity at radius R.

    sphere-flux:      R sum_i int_{cap} y^{a_i} (dv_i/dnu)^2
    potential:        sum_i d_i int_{B_R} dH/dv_i (x . grad_x v_i),
                      rewritten as d (R int_{dB_R} H - n int_{B_R} H) when a
                      single order is shared
    sphere-dirichlet: -(R/2) sum_i int_{cap} y^{a_i} |grad v_i|^2
    bulk:             sum_i ((n-2s_i)/2) int_{B_R^+} y^{a_i} |grad v_i|^2
    """
    grid = v.grid
    n = grid.n_eff
    grads = _gradients(v)

    t_flux, t_sd = 0.0, 0.0
    for i in range(v.m):
        a = float(orders.a[i])
        xs, ys, ws = sphere_weights(grid, R, a)
        gx, gy = grads[i]
        gxi = _interp(grid, gx, xs, ys)
        gyi = _interp(grid, gy, xs, ys)
        dnu = (xs * gxi + ys * gyi) / R
        t_flux += R * float(np.sum(ws * dnu ** 2))
        t_sd += -0.5 * R * float(np.sum(ws * (gxi ** 2 + gyi ** 2)))

    tr = v.traces()
    if orders.equal:
        d = float(orders.d[0])
        hb = float(np.sum(grid.boundary_weights(R) * H.value(tr)))
        t_pot = d * (R * _boundary_sphere_H(v, H, R) - n * hb)
    else:
        grad = H.gradient(tr)
        t_pot = 0.0
        for i in range(v.m):
            gx0 = np.gradient(tr[..., i], grid.x, axis=0)
            xdot = grid.x * gx0 if grid.boundary_dim == 1 else None
            if xdot is None:
                raise FunctionalError("unequal orders on 2-D slabs unsupported")
            t_pot += orders.d[i] * float(
                np.sum(grid.boundary_weights(R) * grad[..., i] * xdot))

    t_bulk = 0.0
    for i in range(v.m):
        gsq = sum(g ** 2 for g in grads[i])
        w = grid.bulk_weights(float(orders.a[i]), "halfball", R)
        t_bulk += 0.5 * (n - 2.0 * float(orders.s[i])) * float(np.sum(w * gsq))

    terms = {"sphere-flux": t_flux, "potential": t_pot,
             "sphere-dirichlet": t_sd, "bulk": t_bulk}
    terms["residual"] = abs(t_flux + t_pot + t_sd + t_bulk)
    terms["dominant"] = max(abs(t_flux), abs(t_pot), abs(t_sd), abs(t_bulk))
    return terms


def pohozaev_residual(v, H, orders, R: float) -> float:
    return pohozaev_terms(v, H, orders, R)["residual"]


# ---------------------------------------------------------------------------
# structure, decay, symmetry

def radial_structure_checks(v: FieldSet, H: NonlinearitySpec,
                            orders: FractionalOrders,
                            far_tol: float = 1e-2) -> dict:
    """Constraints on H at the far state of a decaying radial solution."""
    grid = v.grid
    if not grid.radial:
        raise FunctionalError("needs a radial field")
    tr = v.traces()
    far = float(np.max(np.abs(tr[-1])))
    if far > far_tol:
        raise FunctionalError(
            f"far-field value {far:.3e} exceeds {far_tol}; the decay "
            "hypothesis is not met at this truncation"
        )
    zero = np.zeros(v.m)
    grad0 = H.gradient(zero)
    hess0 = H.hessian(zero)
    dec = []
    for i in range(v.m):
        dr = np.gradient(tr[:, i], grid.x)
        dec.append(bool(np.all(dr[1:] < 1e-10)))
    return {
        "grad_at_zero": float(np.linalg.norm(grad0)),
        "potential_gap": float(H.value(tr[0]) - H.value(zero)),
        "hessian_sum": float(np.sum(hess0)),
        "monotone_decreasing": dec,
        "far_field_value": far,
    }


def decay_checks(v: FieldSet, orders: FractionalOrders) -> dict:
    """Envelope constants for the gradient decay bounds and the fiber tail.

    Per component: smallest C with |dv/dx| <= C/(1+y) everywhere, smallest C
    with |dv/dy| <= C/y for y > 1, the sup of |y^a dv/dy| below y = 1, and
    the weighted fiber Dirichlet integral at the outermost x.
    """
    grid = v.grid
    if grid.boundary_dim != 1:
        raise FunctionalError("decay envelopes are reported on 1-D grids")
    grads = _gradients(v)
    y = grid.y
    out = {"grad_x_envelope": [], "grad_y_envelope": [],
           "weighted_flux_sup": [], "fiber_energy_tail": []}
    for i in range(v.m):
        gx, gy = grads[i]
        out["grad_x_envelope"].append(float(np.max(np.abs(gx) * (1.0 + y))))
        up = y > 1.0
        out["grad_y_envelope"].append(
            float(np.max(np.abs(gy[:, up]) * y[up])) if np.any(up) else 0.0)
        lowmask = (y > 0.0) & (y < 1.0)
        a = float(orders.a[i])
        out["weighted_flux_sup"].append(
            float(np.max(np.abs(gy[:, lowmask]) * y[lowmask] ** a)))
        wy = grid.y_weights(a)
        gsq = gx ** 2 + gy ** 2
        tail = max(float(gsq[0] @ wy), float(gsq[-1] @ wy))
        out["fiber_energy_tail"].append(tail)
    return out


def symmetry_diagnostic(v: FieldSet) -> dict:
    """Preferred boundary direction per component on a 2-D boundary slab.

    The structure tensor int y^a grad_x v (x) grad_x v is diagonalized; the
    principal eigenvector is the candidate 1-D direction and the orthogonal
    mass fraction (smaller eigenvalue over the trace) is the anisotropy,
    zero for a perfectly one-dimensional field.  The lateral edge planes
    are excluded: their one-sided stencils mix the two components.
    """
    grid = v.grid
    if grid.boundary_dim != 2:
        raise FunctionalError("the symmetry diagnostic needs a 2-D boundary slab")
    dirs, aniso = [], []
    for i in range(v.m):
        g1, g2, _ = grid.gradients(v.values[i])
        w = grid.bulk_weights(float(v.orders.a[i]), "full").copy()
        w[0] = w[-1] = 0.0
        w[:, 0] = w[:, -1] = 0.0
        M = np.array([
            [float(np.sum(w * g1 * g1)), float(np.sum(w * g1 * g2))],
            [float(np.sum(w * g1 * g2)), float(np.sum(w * g2 * g2))],
        ])
        tr = M[0, 0] + M[1, 1]
        if tr <= 0.0:
            dirs.append(np.array([1.0, 0.0]))
            aniso.append(0.0)
            continue
        evals, evecs = np.linalg.eigh(M)
        gamma = evecs[:, -1]
        if gamma[0] < 0 or (gamma[0] == 0 and gamma[1] < 0):
            gamma = -gamma
        dirs.append(gamma)
        aniso.append(float(evals[0] / tr))
    return {"direction": dirs, "anisotropy": aniso,
            "max_anisotropy": float(max(aniso))}
