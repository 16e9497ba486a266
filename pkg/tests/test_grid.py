"""Graded mesh, weighted quadrature and region weights."""

import numpy as np
import pytest

from fraclab.grid import (GridError, build_grid, hat_weights, sphere_weights,
                          unit_sphere_area, weighted_integral)


def test_hat_weights_exact_on_linear():
    nodes = np.array([0.0, 0.3, 1.0, 2.5, 4.0])
    for p in (-0.5, 0.0, 0.5):
        w = hat_weights(nodes, p, 0.0, 4.0)
        # integral of t^p * 1 and t^p * t are exact for piecewise-linear data
        assert abs(np.sum(w) - 4.0 ** (p + 1) / (p + 1)) <= 1e-12
        assert abs(np.sum(w * nodes) - 4.0 ** (p + 2) / (p + 2)) <= 1e-12


def test_unit_sphere_area():
    assert abs(unit_sphere_area(1) - 2.0) <= 1e-14
    assert abs(unit_sphere_area(2) - 2.0 * np.pi) <= 1e-14
    assert abs(unit_sphere_area(3) - 4.0 * np.pi) <= 1e-14


def test_graded_mesh_and_transmissibility():
    g = build_grid(L=2.0, Nx=21, Y=4.0, Ny=30, gamma=3.0)
    assert g.y[0] == 0.0 and abs(g.y[-1] - 4.0) <= 1e-12
    assert np.all(np.diff(g.y) > 0)
    # exact conductance: flux of v = y^(1-a) through each cell equals 1-a
    a = 0.5
    t = g.y_transmissibility(a)
    dv = g.y[1:] ** (1 - a) - g.y[:-1] ** (1 - a)
    assert np.allclose(t * dv, 1 - a, rtol=1e-12)


def test_weighted_integral_full_box():
    g = build_grid(L=3.0, Nx=61, Y=2.0, Ny=50, gamma=3.0)
    f = np.ones((g.Nx, g.Ny + 1))
    a = -0.5
    val = weighted_integral(f, a, "full", g)
    exact = 6.0 * 2.0 ** (1 + a) / (1 + a)
    assert abs(val - exact) <= 1e-10 * exact


def test_weighted_integral_cylinder_vs_full():
    g = build_grid(L=3.0, Nx=61, Y=3.0, Ny=50, gamma=3.0)
    f = np.ones((g.Nx, g.Ny + 1))
    a = 0.5
    val = weighted_integral(f, a, "cylinder", g, R=1.5)
    exact = 3.0 * 1.5 ** (1 + a) / (1 + a)
    assert abs(val - exact) <= 1e-10 * exact


def test_halfball_weights_converge_to_measure():
    # int over B_R^+ of y^a approaches its closed form as the mesh refines
    a, R = 0.0, 1.0
    exact = np.pi * R ** 2 / 2.0
    errs = []
    for nx, ny in ((41, 40), (161, 160)):
        g = build_grid(L=2.0, Nx=nx, Y=2.0, Ny=ny, gamma=1.0)
        w = g.bulk_weights(a, "halfball", R)
        errs.append(abs(np.sum(w) - exact))
    assert errs[1] < errs[0] / 2 and errs[1] <= 2e-3


def test_sphere_weights_cap_measure():
    g = build_grid(L=2.0, Nx=41, Y=2.0, Ny=40, gamma=2.0)
    xs, ys, ws = sphere_weights(g, 1.0, 0.0)
    # half circle of radius 1 in the (x, y) half plane
    assert abs(np.sum(ws) - np.pi) <= 1e-8


def test_region_radius_validation():
    g = build_grid(L=1.0, Nx=11, Y=1.0, Ny=10, gamma=2.0)
    with pytest.raises(GridError):
        g.bulk_weights(0.0, "cylinder", 5.0)
    with pytest.raises(GridError):
        g.bulk_weights(1.5, "full")
    with pytest.raises(GridError):
        g.bulk_weights(0.0, "wedge", 0.5)


def test_radial_boundary_measure():
    g = build_grid(L=2.0, Nx=41, Y=1.0, Ny=10, gamma=2.0,
                   radial=True, ambient_n=2)
    # int over the disk of radius 2 of 1 = pi * 4
    assert abs(np.sum(g.x_weights()) - 4.0 * np.pi) <= 1e-10
    assert g.n_eff == 2
