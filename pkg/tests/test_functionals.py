"""Energy, conservation laws, radial identities and diagnostics."""

import os

import numpy as np
import pytest

from fraclab.functionals import (FunctionalError, decay_checks, energy,
                                 energy_scan, hamiltonian_profile,
                                 monotonicity_curve, pohozaev_terms,
                                 radial_hamiltonian, radial_structure_checks,
                                 symmetry_diagnostic)
from fraclab.grid import build_grid
from fraclab.nonlinearity import NonlinearitySpec
from fraclab.orders import make_orders
from fraclab.solver import FieldSet, layer_profile

C = 1.0 / np.pi ** 2
PN = NonlinearitySpec.from_terms(1, [(-C, "cosine", (1,)),
                                     (-C, "monomial", (0,))])
EMPTY = NonlinearitySpec.from_terms(1, [])


def load_fields(run):
    path = os.path.join(run["dir"], "fields.flab")
    return FieldSet.load(path, run["cfg"].grid)


def test_energy_constant_field():
    grid = build_grid(L=10.0, Nx=101, Y=10.0, Ny=40, gamma=2.0)
    orders = make_orders([0.5])
    H = NonlinearitySpec.from_terms(1, [(1.0, "monomial", (0,)),
                                        (-0.5, "monomial", (2,))])
    c = 0.7
    v = FieldSet((np.full((101, 41), c),), grid, orders)
    R = 4.0
    # zero gradient: E_R = -H(c) |B_R| with |B_R| = 2R on the line
    assert energy(v, H, orders, R) == pytest.approx(
        -(1.0 - 0.5 * c ** 2) * 2 * R, rel=1e-10)


def test_energy_scan_fits_explicit_growth():
    # v = x has unit gradient: E_R grows exactly like R^(2+a) = R^(3-2s)
    grid = build_grid(L=120.0, Nx=241, Y=120.0, Ny=80, gamma=3.0)
    s = 0.25
    orders = make_orders([s])
    v = FieldSet((np.broadcast_to(grid.x[:, None],
                                  (241, 81)).copy(),), grid, orders)
    prof = energy_scan(v, EMPTY, orders, np.linspace(10, 100, 16))
    assert abs(prof.exponent - (3.0 - 2.0 * s)) <= 0.05
    assert prof.excluded == 0


def test_hamiltonian_profile_on_exact_layer():
    grid = build_grid(L=20.0, Nx=201, Y=100.0, Ny=120, gamma=3.0)
    orders = make_orders([0.5])
    v = FieldSet((layer_profile(grid, 0.0),), grid, orders)
    prof = hamiltonian_profile(v, PN, orders)
    assert prof.sup_corrected <= 5e-3
    assert prof.balance <= 1e-12
    # the opposite-sign residual misses by about twice the identity size
    gap_scale = float(np.max(np.abs(prof.gap)))
    assert prof.sup_printed >= 1.5 * gap_scale


def test_hamiltonian_profile_requires_shared_order():
    grid = build_grid(L=5.0, Nx=21, Y=5.0, Ny=10, gamma=2.0)
    orders = make_orders([0.3, 0.6])
    v = FieldSet((np.zeros((21, 11)), np.zeros((21, 11))), grid, orders)
    H2 = NonlinearitySpec.from_terms(2, [])
    with pytest.raises(FunctionalError):
        hamiltonian_profile(v, H2, orders)


def test_radial_hamiltonian_monotone(radial_run):
    v = load_fields(radial_run)
    cfg = radial_run["cfg"]
    curve = radial_hamiltonian(v, cfg.nonlinearity, cfg.orders, 2)
    assert curve.max_upward_slope <= 1e-6 * curve.scale
    assert curve.identity_residual <= 0.02
    # the sign-flipped combination rises: the printed direction is wrong
    up = np.max(np.diff(curve.curve_printed))
    assert up > 1e-6 * curve.scale


def test_monotonicity_curve_nondecreasing(radial_run):
    v = load_fields(radial_run)
    cfg = radial_run["cfg"]
    R = np.linspace(3.0, 24.0, 40)
    curve = monotonicity_curve(v, cfg.nonlinearity, cfg.orders, R, 2,
                               h_nonpositive=True)
    assert curve.applicable
    assert curve.min_slope >= -1e-6 * curve.scale


def test_pohozaev_identity(radial_run):
    v = load_fields(radial_run)
    cfg = radial_run["cfg"]
    terms = pohozaev_terms(v, cfg.nonlinearity, cfg.orders, 5.0)
    dominant = max(abs(terms["sphere-flux"]), abs(terms["sphere-dirichlet"]),
                   abs(terms["bulk"]), abs(terms["potential"]))
    assert abs(terms["residual"]) <= 0.03 * dominant


def test_radial_structure_checks(radial_run):
    v = load_fields(radial_run)
    cfg = radial_run["cfg"]
    out = radial_structure_checks(v, cfg.nonlinearity, cfg.orders)
    assert abs(out["grad_at_zero"]) <= 1e-10
    assert out["monotone_decreasing"] == [True]
    assert out["hessian_sum"] <= 0.0
    # measured with the stationarity convention H(0) = H at the far state:
    # the center value sits above it, not below
    assert out["potential_gap"] > 0.0


def test_structure_checks_reject_nondecayed_field():
    grid = build_grid(L=10.0, Nx=101, Y=5.0, Ny=20, gamma=2.0,
                      radial=True, ambient_n=2)
    orders = make_orders([0.5])
    v = FieldSet((np.ones((101, 21)),), grid, orders)
    with pytest.raises(FunctionalError):
        radial_structure_checks(v, EMPTY, orders)


def test_decay_checks_on_exact_layer():
    grid = build_grid(L=20.0, Nx=201, Y=100.0, Ny=120, gamma=3.0)
    orders = make_orders([0.5])
    v = FieldSet((layer_profile(grid, 0.0),), grid, orders)
    out = decay_checks(v, orders)
    # (2/pi) x / (x^2 + (1+y)^2) obeys |dv/dx| <= (2/pi)/(1+y)
    assert out["grad_x_envelope"][0] <= 2.0 / np.pi + 1e-2
    assert out["fiber_energy_tail"][0] <= 5e-2


def test_symmetry_diagnostic_recovers_direction():
    grid = build_grid(L=8.0, Nx=65, Y=8.0, Ny=30, gamma=3.0, boundary_dim=2)
    phi = 0.7
    orders = make_orders([0.5])
    v = FieldSet((layer_profile(grid, 0.0, angle=phi),), grid, orders)
    out = symmetry_diagnostic(v)
    d = np.asarray(out["direction"][0])
    ang = np.arctan2(abs(d[1]), abs(d[0]))
    assert abs(ang - phi) <= 1e-3
    assert out["max_anisotropy"] <= 1e-6
