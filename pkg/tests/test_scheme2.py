"""Staggered predictor-corrector scheme: frozen single-step values and invariants."""
import numpy as np
import pytest

from mblab.errors import NumericalError
from mblab.flux import FluxModel, flux
from mblab.operators import (
    Field,
    GridSpec,
    HALF_GRID,
    INTEGER_GRID,
    MBLParams,
    helmholtz_solve,
)
from mblab.staggered import (
    cfl_check,
    make_state,
    minmod,
    predictor,
    run,
    slopes,
    step_midpoint,
    step_trapezoid,
)

GRID = GridSpec(L=1.0, n_cells=4, dx=0.25, lam=0.1)
PARAMS = MBLParams(epsilon=0.1, tau=1.0)
MODEL = FluxModel(2.0)


def _state_a(variant="trapezoid"):
    u0 = np.array([0.0, 0.0, 0.9, 0.9, 0.9])
    bc = (lambda t: 0.0, lambda t: 0.9)
    return make_state(u0, GRID, PARAMS, MODEL, variant, bc)


def _state_b(variant="trapezoid"):
    u0 = np.array([0.1, 0.3, 0.4, 0.45, 0.5])
    bc = (lambda t: 0.1, lambda t: 0.5)
    return make_state(u0, GRID, PARAMS, MODEL, variant, bc)


def test_initial_transform_case_a():
    st = _state_a()
    assert st.w.values == pytest.approx(
        [0.0, -0.144, 1.044, 0.9, 0.9], rel=1e-12, abs=1e-15)


def test_initial_transform_case_b():
    st = _state_b()
    assert st.w.values == pytest.approx(
        [0.1, 0.316, 0.40800000000000003, 0.45, 0.5], rel=1e-12)


def test_predictor_case_a():
    st = _state_a()
    dt = GRID.lam * GRID.dx
    wp = predictor(st)
    assert wp.time == pytest.approx(dt / 2)
    up = helmholtz_solve(wp, 0.0, 0.9, PARAMS, GRID.dx)
    assert up.values == pytest.approx(
        [0.0, 0.012139846908058789, 0.8876537369914852,
         0.89850348327169527, 0.9], rel=1e-12, abs=1e-15)


def test_trapezoid_step_case_a():
    new = step_trapezoid(_state_a())
    assert new.u.phase == HALF_GRID
    assert new.u.values.shape == (4,)
    assert new.u.time == pytest.approx(0.025)
    assert new.u.values == pytest.approx(
        [0.003034373050424487, 0.37600269414014259,
         0.87614233422734289, 0.89716019326334884], rel=1e-12)


def test_midpoint_step_case_a():
    new = step_midpoint(_state_a("midpoint"))
    assert new.u.values == pytest.approx(
        [0.0036321628863597473, 0.37420546073572414,
         0.87677504625812142, 0.89728924995968284], rel=1e-12)


def test_trapezoid_step_case_b():
    new = step_trapezoid(_state_b())
    assert new.u.values == pytest.approx(
        [0.17728750706436602, 0.34117617112801873,
         0.41789737750046152, 0.47372118639661648], rel=1e-12)


def test_midpoint_step_case_b():
    new = step_midpoint(_state_b("midpoint"))
    assert new.u.values == pytest.approx(
        [0.18827092037804416, 0.34255200884069575,
         0.4178001538204017, 0.47100172623565684], rel=1e-12)


def test_variants_differ():
    a = step_trapezoid(_state_b()).u.values
    b = step_midpoint(_state_b("midpoint")).u.values
    assert not np.allclose(a, b, rtol=1e-6)


def test_unknown_variant():
    with pytest.raises(ValueError):
        _state_a("leapfrog")


def test_minmod():
    assert minmod(1.0, 2.0) == 1.0
    assert minmod(-3.0, -1.0) == -1.0
    assert minmod(1.0, -1.0) == 0.0
    assert minmod(0.0, 5.0) == 0.0
    assert minmod(2.0, 0.5) == 0.5


def test_slopes():
    v = np.array([0.0, 1.0, 3.0, 4.0])
    s = slopes(v)
    assert s.shape == v.shape
    assert s[1] == 1.0  # minmod(3-1, 1-0)
    assert s[2] == 1.0
    with pytest.raises(ValueError):
        slopes(np.array([1.0, 2.0]))


def test_cfl_check():
    ok = cfl_check(Field(np.array([0.0, 0.1, 0.2])), GRID, MODEL)
    assert ok["ok"] and ok["margin"] > 0

    tight = GridSpec(L=1.0, n_cells=4, dx=0.25, lam=0.5)
    bad = cfl_check(Field(np.array([0.6, 0.6, 0.6])), tight, MODEL)
    assert not bad["ok"]


def test_step_raises_on_cfl_violation():
    grid = GridSpec(L=1.0, n_cells=8, dx=0.125, lam=0.5)
    u0 = np.full(9, 0.6)
    bc = (lambda t: 0.6, lambda t: 0.6)
    st = make_state(u0, grid, PARAMS, MODEL, "trapezoid", bc)
    with pytest.raises(NumericalError, match="CFL"):
        step_trapezoid(st)


def test_constant_state_is_preserved_exactly():
    grid = GridSpec(L=1.0, n_cells=8, dx=0.125, lam=0.1)
    u0 = np.full(9, 0.4)
    bc = (lambda t: 0.4, lambda t: 0.4)
    for variant, stepper in (("trapezoid", step_trapezoid),
                             ("midpoint", step_midpoint)):
        st = make_state(u0, grid, PARAMS, MODEL, variant, bc)
        st = stepper(stepper(st))
        assert st.u.phase == INTEGER_GRID
        assert np.allclose(st.u.values, 0.4, rtol=0, atol=1e-14)


def test_mass_change_per_step_pair_matches_boundary_fluxes():
    # with dispersion off, a full staggered pair changes the mass by
    # exactly lam*dx*(f(g) - f(h)) per step
    grid = GridSpec(L=1.0, n_cells=10, dx=0.1, lam=0.1)
    params = MBLParams(epsilon=0.0, tau=1.0)
    g, h = 0.8, 0.0
    u0 = np.where(np.arange(11) <= 4, g, h).astype(float)
    bc = (lambda t: g, lambda t: h)
    st = make_state(u0, grid, params, MODEL, "trapezoid", bc)
    mass0 = grid.dx * st.w.values.sum()
    st = step_trapezoid(step_trapezoid(st))
    mass2 = grid.dx * st.w.values.sum()
    expected = 2.0 * grid.lam * grid.dx * (flux(g, MODEL) - flux(h, MODEL))
    assert mass2 - mass0 == pytest.approx(expected, abs=1e-10)


def test_run_lands_snapshots_exactly():
    st = _state_a()
    dt = GRID.lam * GRID.dx  # 0.025
    t_mid = 3.3 * dt         # not a multiple of a full pair
    fields = run(st, t_final=5.0 * dt, snapshot_times=[t_mid])
    assert len(fields) == 2
    assert [f.time for f in fields] == pytest.approx([t_mid, 5.0 * dt])
    for f in fields:
        assert f.phase == INTEGER_GRID
        assert f.values.shape == (5,)


def test_run_is_deterministic():
    a = run(_state_a(), t_final=0.2)[-1].values
    b = run(_state_a(), t_final=0.2)[-1].values
    assert np.array_equal(a, b)


def test_run_validates_times():
    with pytest.raises(ValueError):
        run(_state_a(), t_final=0.0)
    with pytest.raises(ValueError):
        run(_state_a(), t_final=0.1, snapshot_times=[0.2])
    with pytest.raises(ValueError):
        run(_state_a(), t_final=0.1, snapshot_times=[-0.05])
