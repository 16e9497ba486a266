"""Direct fractional-Laplacian evaluators and their agreement."""

import numpy as np
import pytest

from fraclab.fracop import (LineDataError, LineFunction, cross_validate,
                            frac_lap_pv, frac_lap_spectral)
from fraclab.grid import build_grid
from fraclab.orders import symbol_constant


def test_line_function_validation():
    x = np.linspace(0, 1, 11)
    with pytest.raises(LineDataError):
        LineFunction(x[:4], np.zeros(4))
    with pytest.raises(LineDataError):
        LineFunction(x ** 2, np.zeros(11))
    with pytest.raises(LineDataError):
        LineFunction(x, np.zeros(11), tail="algebraic")
    u = LineFunction(x, np.sin(x))
    assert u.alpha == np.sin(0.0) and u.beta == pytest.approx(np.sin(1.0))


def test_periodic_tail_needs_closed_window():
    x = np.linspace(0, 2 * np.pi, 33)
    with pytest.raises(LineDataError):
        LineFunction(x, np.sin(x) + x * 0.01, tail="periodic")
    u = LineFunction(x, np.cos(x), tail="periodic")
    assert u.alpha == pytest.approx(np.mean(np.cos(x[:-1])))


def test_pv_on_cosine_matches_symbol():
    x = np.linspace(-np.pi, np.pi, 513)
    u = LineFunction(x, np.cos(x), tail="periodic")
    for s in (0.25, 0.5, 0.75):
        idx, vals, _ = frac_lap_pv(u, s)
        assert np.max(np.abs(vals - np.cos(x[idx]))) <= 1e-2


def test_spectral_on_plane_wave():
    n, period = 256, 2 * np.pi
    x = np.linspace(0, period, n, endpoint=False)
    for s in (0.25, 0.75):
        for k in (1, 3):
            out = frac_lap_spectral(np.cos(k * x), s, period)
            assert np.allclose(out, k ** (2 * s) * np.cos(k * x), atol=1e-10)


def test_spectral_validation():
    with pytest.raises(LineDataError):
        frac_lap_spectral(np.zeros(100), 0.5, 1.0)
    with pytest.raises(LineDataError):
        frac_lap_spectral(np.zeros(64), 0.5, -1.0)


def test_symbol_constant_normalizes_pv():
    # the half-order kernel constant is the classical 1/pi
    assert symbol_constant(0.5) == pytest.approx(1.0 / np.pi)


def test_decay_tail_bound_reported():
    x = np.linspace(-40, 40, 801)
    u = LineFunction(x, (2 / np.pi) * np.arctan(x), tail="decay",
                     alpha=-1.0, beta=1.0)
    _, _, bound = frac_lap_pv(u, 0.5)
    assert 0 < bound < 1e-3


def test_cross_validate_periodic_routes_agree():
    grid = build_grid(L=np.pi, Nx=257, Y=12.0, Ny=120, gamma=3.0)
    u = LineFunction(grid.x, np.cos(grid.x), tail="periodic")
    out = cross_validate(u, 0.5, grid, periodic=True)
    assert out["pv_vs_spectral"] <= 1e-2
    assert out["extension_vs_pv"] <= 1e-2
