"""Extension solves: exact layers, harmonic extension, trace flux."""

import numpy as np
import pytest

from fraclab.grid import build_grid
from fraclab.nonlinearity import NonlinearitySpec
from fraclab.orders import make_orders
from fraclab.solver import (BoundaryData, FieldSet, SolverError, dtn,
                            harmonic_extension, layer_profile, solve_coupled,
                            solve_radial)

C = 1.0 / np.pi ** 2
PN_TERMS = [(-C, "cosine", (1,)), (-C, "monomial", (0,))]


def pn_potential():
    # H(u) = -(cos(pi u) + 1) / pi^2, so H'(u) = sin(pi u) / pi and the
    # layer (2/pi) arctan(x) solves the half-order problem exactly
    return NonlinearitySpec.from_terms(1, PN_TERMS)


def test_layer_profile_reduces_to_arctan():
    grid = build_grid(L=8.0, Nx=81, Y=6.0, Ny=30, gamma=2.0)
    prof = layer_profile(grid, 0.0)
    xm, ym = np.meshgrid(grid.x, grid.y, indexing="ij")
    exact = (2.0 / np.pi) * np.arctan2(xm, 1.0 + ym)
    assert np.max(np.abs(prof - exact)) <= 1e-14


def test_layer_profile_constant_angular_flux():
    # the defining ODE (sin(t)^a G')' = 0: the weighted angular flux is
    # constant along any row, read off with finite differences at y = 0
    grid = build_grid(L=12.0, Nx=481, Y=12.0, Ny=20, gamma=2.0)
    for a in (-0.5, 0.5):
        prof = layer_profile(grid, a)
        theta = np.arctan2(1.0, grid.x)
        dG = np.gradient(prof[:, 0], grid.x) / np.gradient(theta, grid.x)
        flux = np.sin(theta) ** a * dG
        mid = flux[40:-40]
        assert (mid.max() - mid.min()) <= 1e-3 * abs(np.mean(mid))


def test_layer_profile_needs_direction_in_2d():
    grid = build_grid(L=4.0, Nx=17, Y=4.0, Ny=8, gamma=2.0, boundary_dim=2)
    with pytest.raises(SolverError):
        layer_profile(grid, 0.0)
    prof = layer_profile(grid, 0.0, angle=0.0)
    assert prof.shape == (17, 17, 9)


def test_exact_layer_solve():
    grid = build_grid(L=20.0, Nx=201, Y=40.0, Ny=80, gamma=3.0)
    orders = make_orders([0.5])
    prof = layer_profile(grid, 0.0)
    bc = BoundaryData(exact=(prof,), top="dirichlet")
    init = FieldSet((prof,), grid, orders)
    v, report = solve_coupled(grid, orders, pn_potential(), bc, init)
    assert report.converged and report.residual_history[-1] <= 1e-10
    exact = (2.0 / np.pi) * np.arctan(grid.x)
    assert np.max(np.abs(v.trace(0) - exact)) <= 5e-3


def test_constant_data_gives_constant_solution():
    grid = build_grid(L=10.0, Nx=41, Y=10.0, Ny=20, gamma=2.0)
    orders = make_orders([0.25])
    H = NonlinearitySpec.from_terms(1, [(1.0 / 3.0, "monomial", (3,))])
    bc = BoundaryData(alpha=np.zeros(1), beta=np.zeros(1))
    init = FieldSet((np.zeros(FieldSet.grid_shape(grid)),), grid, orders)
    v, report = solve_coupled(grid, orders, H, bc, init)
    assert report.converged
    assert np.max(np.abs(v.values[0])) <= 1e-12


def test_harmonic_extension_half_order_poisson():
    # s = 1/2 extension of cos(x) is e^(-y) cos(x) on a periodic slab
    grid = build_grid(L=np.pi, Nx=129, Y=10.0, Ny=80, gamma=3.0)
    v = harmonic_extension(np.cos(grid.x), 0.5, grid, periodic=True)
    xm, ym = np.meshgrid(grid.x, grid.y, indexing="ij")
    exact = np.exp(-ym) * np.cos(xm)
    assert np.max(np.abs(v.values[0] - exact)) <= 5e-3


def test_dtn_on_explicit_field():
    # v = t(x) (1 - y^(1-a) / (1-a)) has flux exactly t(x)
    grid = build_grid(L=2.0, Nx=21, Y=1.0, Ny=40, gamma=2.0)
    s = 0.25
    a = 1.0 - 2.0 * s
    t = np.sin(grid.x)
    f = np.outer(t, 1.0 - grid.y ** (1.0 - a) / (1.0 - a))
    v = FieldSet((f,), grid, make_orders([s]))
    flux = dtn(v)[0]
    assert np.max(np.abs(flux - t)) <= 1e-8


def test_radial_solve_decaying_state():
    # strong negative well at zero plus stabilizing terms: the decaying
    # profile from a gaussian seed converges without leaving (0, inf)
    grid = build_grid(L=15.0, Nx=151, Y=15.0, Ny=60, gamma=3.0,
                      radial=True, ambient_n=2)
    orders = make_orders([0.5])
    H = NonlinearitySpec.from_terms(1, [
        (-50.0, "monomial", (0,)), (-0.5, "monomial", (2,)),
        (1.0 / 3.0, "monomial", (3,)),
    ])
    bc = BoundaryData(beta=np.zeros(1))
    seed = np.outer(3.0 * np.exp(-grid.x ** 2), np.exp(-grid.y))
    init = FieldSet((seed,), grid, orders)
    v, report = solve_radial(grid, 2, orders, H, bc, init)
    assert report.converged
    tr = v.trace(0)
    assert tr[0] > 0.1 and abs(tr[-1]) <= 1e-8


def test_fieldset_roundtrip(tmp_path):
    grid = build_grid(L=3.0, Nx=11, Y=2.0, Ny=6, gamma=2.0)
    orders = make_orders([0.3, 0.7])
    vals = tuple(np.random.default_rng(1).normal(size=(11, 7))
                 for _ in range(2))
    v = FieldSet(vals, grid, orders)
    p = tmp_path / "f.flab"
    v.save(p)
    w = FieldSet.load(p, grid)
    assert w.m == 2 and np.array_equal(w.values[0], vals[0])
    assert np.array_equal(w.orders.s, orders.s)


def test_fieldset_validation():
    grid = build_grid(L=3.0, Nx=11, Y=2.0, Ny=6, gamma=2.0)
    orders = make_orders([0.5])
    with pytest.raises(SolverError):
        FieldSet((np.zeros((5, 5)),), grid, orders)
    bad = np.zeros((11, 7))
    bad[0, 0] = np.nan
    with pytest.raises(SolverError):
        FieldSet((bad,), grid, orders)
