"""Potential catalog: exact derivatives, orientability, monotonicity."""

import numpy as np
import pytest

from fraclab.nonlinearity import (NonlinearityError, NonlinearitySpec, Term,
                                  check_H_monotone, check_orientability)

RNG = np.random.default_rng(7)


def fd_gradient(H, u, h=1e-6):
    g = np.zeros(H.m)
    for i in range(H.m):
        e = np.zeros(H.m)
        e[i] = h
        g[i] = (H.value(u + e) - H.value(u - e)) / (2 * h)
    return g


def sample_spec():
    return NonlinearitySpec.from_terms(2, [
        (-0.3, "cosine", (2, 0)),
        (0.7, "monomial", (3, 1)),
        (-0.125, "monomial", (0, 2)),
        (0.25, "monomial", (1, 1)),
    ])


def test_value_known_point():
    H = sample_spec()
    u = np.array([0.5, -1.0])
    exact = (-0.3 * np.cos(np.pi) + 0.7 * 0.5 ** 3 * (-1.0)
             - 0.125 * 1.0 + 0.25 * 0.5 * (-1.0))
    assert abs(H.value(u) - exact) <= 1e-14


def test_gradient_matches_finite_differences():
    H = sample_spec()
    for _ in range(20):
        u = RNG.uniform(-1.5, 1.5, size=2)
        assert np.allclose(H.gradient(u), fd_gradient(H, u), atol=1e-8)


def test_hessian_symmetric_and_consistent():
    H = sample_spec()
    u = RNG.uniform(-1, 1, size=(40, 2))
    h = H.hessian(u)
    assert np.allclose(h, np.swapaxes(h, -1, -2))
    # directional second difference against the quadratic form
    d = np.array([0.3, -0.4])
    eps = 1e-4
    for uu, hh in zip(u[:5], h[:5]):
        second = (H.value(uu + eps * d) - 2 * H.value(uu)
                  + H.value(uu - eps * d)) / eps ** 2
        assert abs(second - d @ hh @ d) <= 1e-5 * max(1.0, abs(second))


def test_batched_evaluation_shapes():
    H = sample_spec()
    u = RNG.uniform(-1, 1, size=(6, 5, 2))
    assert H.value(u).shape == (6, 5)
    assert H.gradient(u).shape == (6, 5, 2)
    assert H.hessian(u).shape == (6, 5, 2, 2)


def test_term_validation():
    with pytest.raises(NonlinearityError):
        Term(1.0, "exponential", (1,))
    with pytest.raises(NonlinearityError):
        Term(1.0, "monomial", (-1, 2))
    with pytest.raises(NonlinearityError):
        Term(1.0, "cosine", (1, 1))
    with pytest.raises(NonlinearityError):
        NonlinearitySpec.from_terms(2, [(1.0, "monomial", (1,))])


def test_orientability_attractive_coupling():
    # mixed Hessian +1/4 > 0: orientable with equal signs
    H = NonlinearitySpec.from_terms(2, [
        (-0.125, "monomial", (2, 0)),
        (-0.125, "monomial", (0, 2)),
        (0.25, "monomial", (1, 1)),
    ])
    rep = check_orientability(H, [-1, -1], [1, 1])
    assert rep.orientable and rep.theta == (1, 1)


def test_orientability_repulsive_coupling():
    # mixed Hessian -1/4 < 0: opposite signs are required
    H = NonlinearitySpec.from_terms(2, [(-0.25, "monomial", (1, 1))])
    rep = check_orientability(H, [-1, -1], [1, 1])
    assert rep.orientable and rep.theta == (1, -1)


def test_non_orientable_triple():
    # three pairwise couplings with an odd frustrated sign pattern
    H = NonlinearitySpec.from_terms(3, [
        (-0.25, "monomial", (1, 1, 0)),
        (-0.25, "monomial", (0, 1, 1)),
        (-0.25, "monomial", (1, 0, 1)),
    ])
    rep = check_orientability(H, [-1] * 3, [1] * 3)
    assert not rep.orientable and rep.worst_violation < 0


def test_h_monotone_on_synthetic_layer():
    from fraclab.grid import build_grid
    from fraclab.orders import make_orders
    from fraclab.solver import FieldSet, layer_profile

    grid = build_grid(L=10.0, Nx=101, Y=5.0, Ny=20, gamma=2.0)
    prof = layer_profile(grid, 0.0)
    orders = make_orders([0.5, 0.5])
    v = FieldSet((prof, prof), grid, orders)
    H = NonlinearitySpec.from_terms(2, [(0.25, "monomial", (1, 1))])
    out = check_H_monotone(v, H, orders)
    assert out["monotone_per_component"] == [True, True]
    assert out["pair_condition_slack"] >= 0.0
