"""Stability forms, linearized spectrum, quotient fields and rigidity."""

import numpy as np
import pytest

from fraclab.grid import build_grid
from fraclab.nonlinearity import NonlinearitySpec
from fraclab.orders import make_orders
from fraclab.solver import FieldSet, harmonic_extension, layer_profile
from fraclab.stability import (StabilityError, bounded_energy_check,
                               cutoff_family, dichotomy_check, kterm_identity,
                               linearized_spectrum, liouville_growth,
                               poincare_reduction_slack, sigma_residual,
                               stability_gap)

C = 1.0 / np.pi ** 2
PN = NonlinearitySpec.from_terms(1, [(-C, "cosine", (1,)),
                                     (-C, "monomial", (0,))])


def exact_layer(L=20.0, Nx=201, Y=20.0, Ny=80):
    grid = build_grid(L=L, Nx=Nx, Y=Y, Ny=Ny, gamma=3.0)
    orders = make_orders([0.5])
    return FieldSet((layer_profile(grid, 0.0),), grid, orders), grid, orders


def test_cutoff_family_supported_inside():
    grid = build_grid(L=4.0, Nx=41, Y=4.0, Ny=16, gamma=2.0)
    cuts = cutoff_family(grid)
    assert len(cuts) == 5
    for eta in cuts:
        assert np.all(eta[0] == 0) and np.all(eta[-1] == 0)
        assert np.all(eta[..., -1] == 0)
        assert np.max(eta) > 0.5


def test_stability_gap_nonnegative_on_exact_layer():
    v, grid, orders = exact_layer()
    rep = stability_gap(v, PN, orders)
    assert rep.family == "dx-times-dyadic-cutoffs"
    assert rep.quadratic_gap >= -1e-6


def test_stability_gap_rejects_unsupported_tests():
    v, grid, orders = exact_layer(L=5.0, Nx=41, Y=5.0, Ny=16)
    bad = np.ones(FieldSet.grid_shape(grid))
    with pytest.raises(StabilityError):
        stability_gap(v, PN, orders, tests=[(bad,)])


def test_poincare_reduction_slack():
    v, grid, orders = exact_layer()
    assert poincare_reduction_slack(v, PN, orders) >= -1e-6


def test_spectrum_nonnegative_and_sign_consistent():
    v, grid, orders = exact_layer()
    rep = linearized_spectrum(v, PN, orders)
    assert rep.smallest_eigenvalue >= -1e-6
    assert rep.eigenvector_sign_consistent
    assert rep.details["eigenvalues"] == sorted(rep.details["eigenvalues"])


def test_spectrum_decoupled_pair_is_union():
    # two uncoupled copies: the joint spectrum interleaves two copies of
    # the scalar one, so the bottom eigenvalue is (numerically) doubled
    v, grid, orders = exact_layer(L=10.0, Nx=101, Y=10.0, Ny=40)
    rep1 = linearized_spectrum(v, PN, orders, k=2)
    orders2 = make_orders([0.5, 0.5])
    H2 = NonlinearitySpec.from_terms(2, [
        (-C, "cosine", (1, 0)), (-C, "cosine", (0, 1)),
        (-2 * C, "monomial", (0, 0)),
    ])
    v2 = FieldSet((v.values[0], v.values[0]), grid, orders2)
    rep2 = linearized_spectrum(v2, H2, orders2, k=3)
    assert abs(rep2.smallest_eigenvalue - rep1.smallest_eigenvalue) <= 1e-8
    assert abs(rep2.details["eigenvalues"][1]
               - rep1.smallest_eigenvalue) <= 1e-8


def test_sigma_residual_constant_quotient():
    v, grid, orders = exact_layer()
    phi = FieldSet((grid.gradients(v.values[0])[0],), grid, orders)
    out = sigma_residual(v, phi, PN, orders)
    # psi = phi makes sigma identically one
    assert out["sigma_variance"] <= 1e-12
    assert out["interior_sup"] <= 1e-6
    assert out["boundary_sup"] <= 1e-6


def test_sigma_residual_offset_invariance():
    # shifting sigma by a constant leaves both residuals unchanged:
    # v -> v + c x shifts psi by c while phi is untouched
    v, grid, orders = exact_layer(L=10.0, Nx=101, Y=10.0, Ny=40)
    phi = FieldSet((np.ones(FieldSet.grid_shape(grid)),), grid, orders)
    H0 = NonlinearitySpec.from_terms(1, [])
    base = sigma_residual(v, phi, H0, orders)
    shifted = FieldSet((v.values[0] + 0.37 * grid.x[:, None],), grid, orders)
    out = sigma_residual(shifted, phi, H0, orders)
    # equality up to roundoff of the huge near-boundary conductances
    assert out["interior_sup"] == pytest.approx(base["interior_sup"],
                                                rel=1e-6)
    assert out["sigma_variance"] == pytest.approx(base["sigma_variance"],
                                                  abs=1e-10)


def test_sigma_residual_rejects_sign_changing_phi():
    v, grid, orders = exact_layer(L=10.0, Nx=101, Y=10.0, Ny=40)
    phi = FieldSet((np.broadcast_to(grid.x[:, None],
                                    FieldSet.grid_shape(grid)).copy(),),
                   grid, orders)
    with pytest.raises(StabilityError):
        sigma_residual(v, phi, PN, orders)


def test_liouville_growth_log_accepted():
    v, grid, orders = exact_layer(L=40.0, Nx=161, Y=40.0, Ny=60)
    phi = [grid.gradients(v.values[0])[0]]
    sigma = [np.ones_like(phi[0])]
    out = liouville_growth(sigma, phi, orders, grid, "log",
                           np.linspace(5, 35, 13))
    assert out["hypothesis_satisfied"]
    assert np.all(np.isfinite(out["curve"]))


def test_liouville_growth_rejects_powers():
    v, grid, orders = exact_layer(L=5.0, Nx=41, Y=5.0, Ny=16)
    phi = [np.ones(FieldSet.grid_shape(grid))]
    sigma = [np.ones_like(phi[0])]
    with pytest.raises(StabilityError, match="outside the admissible class"):
        liouville_growth(sigma, phi, orders, grid, "power",
                         [2.0, 4.0], power=1.0)
    with pytest.raises(StabilityError):
        liouville_growth(sigma, phi, orders, grid, "power",
                         [2.0, 4.0], power=-1.0)
    with pytest.raises(StabilityError):
        liouville_growth(sigma, phi, orders, grid, "exp", [2.0, 4.0])


def test_bounded_energy_localized_field():
    # extension of a localized bump: the truncated Dirichlet integral
    # saturates, so the fitted exponent sits far below n - 2s
    s = 0.25
    orders = make_orders([s])
    grid = build_grid(L=60.0, Nx=241, Y=60.0, Ny=100, gamma=3.0)
    v = harmonic_extension(np.exp(-grid.x ** 2), s, grid)
    out = bounded_energy_check(v, orders, np.linspace(10, 50, 17),
                               grad_H_nonnegative=True)
    assert out["applicable"]
    assert out["exponents"][0] <= 0.6


def test_dichotomy_tags():
    grid = build_grid(L=10.0, Nx=101, Y=5.0, Ny=20, gamma=2.0)
    orders = make_orders([0.5])
    shape = FieldSet.grid_shape(grid)
    flat = np.ones(shape)
    layer = layer_profile(grid, 0.0)
    bump = np.exp(-np.broadcast_to(grid.x[:, None], shape) ** 2).copy()
    v = FieldSet((flat, layer, bump), grid, make_orders([0.5] * 3))
    tags = dichotomy_check(v)
    assert tags == ["identically-flat", "strictly-one-signed", "mixed"]


def test_dichotomy_needs_slab():
    grid = build_grid(L=5.0, Nx=21, Y=2.0, Ny=8, gamma=2.0,
                      radial=True, ambient_n=2)
    v = FieldSet((np.ones((21, 9)),), grid, make_orders([0.5]))
    with pytest.raises(StabilityError):
        dichotomy_check(v)


def test_kterm_identity_random_instances():
    rng = np.random.default_rng(42)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(2, 6))
        h = rng.normal(size=(m, m))
        h = h + h.T
        sig = rng.normal(size=m)
        worst = max(worst, abs(kterm_identity(h, sig)))
        worst = max(worst, abs(kterm_identity(h, sig, f=np.tanh)))
    assert worst <= 1e-12


def test_kterm_sign_mechanism():
    # nonnegative symmetric h and odd nondecreasing f force the K term <= 0
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = int(rng.integers(2, 5))
        h = np.abs(rng.normal(size=(m, m)))
        h = h + h.T
        sig = rng.normal(size=m)
        total = 0.0
        for i in range(m):
            for j in range(m):
                total += h[i, j] * sig[i] * np.tanh(sig[j] - sig[i])
        assert total <= 1e-12


def test_kterm_rejects_asymmetric():
    with pytest.raises(StabilityError):
        kterm_identity(np.array([[0.0, 1.0], [2.0, 0.0]]),
                       np.array([1.0, 2.0]))
