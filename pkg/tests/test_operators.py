"""Grids, fields, and the dispersive Helmholtz transfer operators."""
from __future__ import annotations

import math

import numpy as np
import pytest

from mblab.errors import NumericalError
from mblab.operators import (
    Field,
    GridSpec,
    HALF_GRID,
    INTEGER_GRID,
    MBLParams,
    d2_central,
    helmholtz_apply,
    helmholtz_solve,
    weighted_h1_norm,
)


def test_grid_spec_basics():
    g = GridSpec(L=1.0, n_cells=8, dx=0.125, lam=0.1)
    assert g.nodes().shape == (9,)
    assert g.centers().shape == (8,)
    assert g.nodes()[0] == 0.0 and g.nodes()[-1] == pytest.approx(1.0)
    assert np.allclose(g.centers(), g.nodes()[:-1] + 0.0625)


def test_grid_spec_default_dx():
    g = GridSpec(L=2.0, n_cells=10)
    assert g.dx == pytest.approx(0.2)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(L=1.0, n_cells=3)
    with pytest.raises(ValueError):
        GridSpec(L=-1.0, n_cells=8)
    with pytest.raises(ValueError):
        GridSpec(L=1.0, n_cells=8, dx=0.2)  # 8 * 0.2 != 1
    with pytest.raises(ValueError):
        GridSpec(L=1.0, n_cells=8, lam=0.0)


def test_params_validation():
    p = MBLParams(epsilon=0.01, tau=5.0)
    assert p.disp == pytest.approx(5e-4)
    with pytest.raises(ValueError):
        MBLParams(epsilon=-0.01, tau=5.0)
    with pytest.raises(ValueError):
        MBLParams(epsilon=0.01, tau=-5.0)


def test_field_rejects_nan():
    with pytest.raises(NumericalError):
        Field(np.array([0.0, np.nan, 1.0]))
    with pytest.raises(NumericalError):
        Field(np.array([0.0, np.inf, 1.0]))
    with pytest.raises(ValueError):
        Field(np.zeros(4), phase="diagonal")


def test_d2_central_exact_on_quadratic():
    x = np.linspace(0.0, 1.0, 21)
    u = 3.0 * x * x - x + 2.0
    out = d2_central(Field(u), x[1] - x[0], bc_left=u[0], bc_right=u[-1])
    assert np.allclose(out.values[1:-1], 6.0, rtol=0, atol=1e-10)
    with pytest.raises(ValueError):
        d2_central(Field(np.zeros(2)), 0.1, 0.0, 0.0)


def _random_node_field(n, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.2, 0.9, n + 1)


def test_round_trip_order2():
    params = MBLParams(epsilon=0.3, tau=2.0)
    dx = 1.0 / 64
    u = _random_node_field(64, seed=1)
    w = helmholtz_apply(Field(u), params, dx, order=2)
    back = helmholtz_solve(w, u[0], u[-1], params, dx, order=2)
    assert np.allclose(back.values, u, rtol=1e-12, atol=1e-13)


def test_round_trip_order4():
    params = MBLParams(epsilon=0.3, tau=2.0)
    dx = 1.0 / 64
    u = _random_node_field(64, seed=2)
    w = helmholtz_apply(Field(u), params, dx, order=4)
    back = helmholtz_solve(w, u[0], u[-1], params, dx, order=4)
    assert np.allclose(back.values, u, rtol=1e-12, atol=1e-13)


def test_apply_requires_node_field():
    params = MBLParams(epsilon=0.1, tau=1.0)
    with pytest.raises(ValueError):
        helmholtz_apply(Field(np.zeros(8), phase=HALF_GRID), params, 0.1)
    with pytest.raises(ValueError):
        helmholtz_apply(Field(np.zeros(9)), params, 0.1, order=3)


def test_sine_modes_are_eigenvectors_order2():
    # second-difference eigenvalue on Dirichlet sine modes
    L, n = 1.0, 64
    dx = L / n
    params = MBLParams(epsilon=0.1, tau=1.0)
    c = params.disp
    x = np.linspace(0.0, L, n + 1)
    for k in range(1, 7):
        u = np.sin(k * math.pi * x / L)
        mu = 1.0 + c * (2.0 - 2.0 * math.cos(k * math.pi * dx / L)) / dx**2
        w = helmholtz_apply(Field(u), params, dx, order=2)
        assert np.max(np.abs(w.values[1:-1] - mu * u[1:-1])) < 1e-12
        back = helmholtz_solve(Field(mu * u), 0.0, 0.0, params, dx, order=2)
        assert np.max(np.abs(back.values - u)) < 1e-12


def test_inverse_damps_high_modes():
    L, n = 1.0, 64
    dx = L / n
    params = MBLParams(epsilon=0.5, tau=1.0)
    x = np.linspace(0.0, L, n + 1)
    amps = []
    for k in range(1, 8):
        v = np.sin(k * math.pi * x / L)
        out = helmholtz_solve(Field(v), 0.0, 0.0, params, dx, order=2)
        amps.append(np.dot(out.values, v) / np.dot(v, v))
    amps = np.array(amps)
    assert np.all(amps <= 1.0 + 1e-14)
    assert np.all(np.diff(amps) < 0.0)


def test_order4_stencil_exact_on_quintic_interior():
    # the five-point interior stencil differentiates degree-5 data exactly
    n = 40
    dx = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    u = x**5 - 2.0 * x**4 + x**3 + 0.5 * x - 3.0
    d2 = 20.0 * x**3 - 24.0 * x**2 + 6.0 * x
    params = MBLParams(epsilon=1.0, tau=1.0)
    w = helmholtz_apply(Field(u), params, dx, order=4)
    resid = u - w.values  # equals disp * D2 u
    assert np.allclose(resid[2:-2], d2[2:-2], rtol=0, atol=1e-9)


def test_one_sided_closures_exact_on_quartic():
    n = 40
    dx = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    u = x**4 - x**2 + 0.25
    d2 = 12.0 * x**2 - 2.0
    params = MBLParams(epsilon=1.0, tau=1.0)
    w = helmholtz_apply(Field(u), params, dx, order=4)
    resid = u - w.values
    assert np.allclose(resid[1:-1], d2[1:-1], rtol=0, atol=1e-9)


def test_zero_dispersion_solve_is_identity_with_bc_override():
    params = MBLParams(epsilon=0.0, tau=5.0)
    w = np.array([0.3, 0.5, 0.6, 0.55, 0.2])
    out = helmholtz_solve(Field(w), 0.1, 0.9, params, 0.25, order=2)
    assert np.array_equal(out.values, [0.1, 0.5, 0.6, 0.55, 0.9])


def test_coefficient_override():
    dx = 1.0 / 32
    u = _random_node_field(32, seed=3)
    params = MBLParams(epsilon=0.2, tau=3.0)
    w = helmholtz_apply(Field(u), params, dx)
    # solving with coefficient=0 ignores params and just pins the ends
    out = helmholtz_solve(w, u[0], u[-1], params, dx, coefficient=0.0)
    assert np.array_equal(out.values[1:-1], w.values[1:-1])
    assert out.values[0] == u[0] and out.values[-1] == u[-1]


def test_half_grid_solve_constant():
    params = MBLParams(epsilon=0.4, tau=1.5)
    w = Field(np.full(16, 0.7), phase=HALF_GRID)
    for order in (2, 4):
        out = helmholtz_solve(w, 0.7, 0.7, params, 0.1, order=order)
        assert out.phase == HALF_GRID
        assert np.allclose(out.values, 0.7, rtol=0, atol=1e-13)


def test_half_grid_solve_linear():
    # reflected ghosts are exact for affine data, so the solve returns it
    L, n = 1.0, 20
    dx = L / n
    xc = (np.arange(n) + 0.5) * dx
    vals = 0.2 + 0.6 * xc
    params = MBLParams(epsilon=0.3, tau=2.0)
    for order in (2, 4):
        out = helmholtz_solve(Field(vals, phase=HALF_GRID), 0.2, 0.8,
                              params, dx, order=order)
        assert np.allclose(out.values, vals, rtol=0, atol=1e-12)


def test_weighted_h1_norm_zero_and_constant():
    params = MBLParams(epsilon=1.0, tau=1.0)
    n = 100
    dx = 1.0 / n
    assert weighted_h1_norm(Field(np.zeros(n + 1)), params, dx) == 0.0
    c = 0.8
    got = weighted_h1_norm(Field(np.full(n + 1, c)), params, dx)
    assert got == pytest.approx(c * 1.0, rel=1e-12)  # c * sqrt(L)


def test_weighted_h1_norm_linear():
    # y = x on [0,1] with eps*sqrt(tau) = 1: sqrt(1/3 + 1) up to O(dx^2)
    params = MBLParams(epsilon=1.0, tau=1.0)
    n = 100
    dx = 1.0 / n
    y = np.linspace(0.0, 1.0, n + 1)
    assert weighted_h1_norm(Field(y), params, dx) == pytest.approx(
        math.sqrt(4.0 / 3.0), abs=1e-4)


def test_weighted_h1_norm_is_a_norm():
    params = MBLParams(epsilon=0.2, tau=4.0)
    n = 50
    dx = 1.0 / n
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.normal(size=n + 1)
        b = rng.normal(size=n + 1)
        na = weighted_h1_norm(Field(a), params, dx)
        nb = weighted_h1_norm(Field(b), params, dx)
        nab = weighted_h1_norm(Field(a + b), params, dx)
        assert nab <= na + nb + 1e-12
        assert weighted_h1_norm(Field(2.5 * a), params, dx) == pytest.approx(
            2.5 * na, rel=1e-12)
