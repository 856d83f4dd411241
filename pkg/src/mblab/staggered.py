"""Second-order staggered central schemes (trapezoid and midpoint variants).

One step advances node values onto the grid shifted by dx/2: the evolved
quantity is w = (I - eps^2 tau D^2) u, moved by a predictor-corrector pair
with minmod-limited slopes, and u is recovered from w by the banded
Helmholtz solve.  Steps are taken in pairs so that reported solutions live
on the integer grid.

Per step, with lam = dt/dx and c = eps^2 tau:

  staggered average   wb_{j+1/2} = (w_j + w_{j+1})/2 + (w'_j - w'_{j+1})/8
  predictor           w_j(t+dt/2) = w_j + (eps dx D2 u_j - f'_j) lam/2
  trapezoid corrector (I - (c + eps dt/2) D2) u(t+dt) =
                        (I - (c - eps dt/2) D2) ub(t) - lam [df at t+dt/2]
  midpoint corrector  (I - c D2) u(t+dt) =
                        wb(t) - lam [df at t+dt/2] + eps dt D2 ub(t+dt/2)

where w', f' are minmod-limited undivided differences and df is the flux
difference between the two neighbors of the new staggered node at the
half time.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .errors import NumericalError
from .flux import FluxModel, flux, flux_deriv
from .operators import (
    Field,
    GridSpec,
    HALF_GRID,
    INTEGER_GRID,
    MBLParams,
    helmholtz_solve,
)

__all__ = [
    "Scheme2State",
    "make_state",
    "minmod",
    "slopes",
    "predictor",
    "step_trapezoid",
    "step_midpoint",
    "cfl_check",
    "run",
]

TRAPEZOID = "trapezoid"
MIDPOINT = "midpoint"


@dataclass
class Scheme2State:
    u: Field
    w: Field
    grid: GridSpec
    params: MBLParams
    model: FluxModel
    variant: str
    bc: tuple[Callable[[float], float], Callable[[float], float]]


def make_state(u0, grid: GridSpec, params: MBLParams, model: FluxModel,
               variant: str, bc) -> Scheme2State:
    """Build a consistent state from node-centered initial values."""
    if variant not in (TRAPEZOID, MIDPOINT):
        raise ValueError(f"unknown variant {variant!r}")
    u = Field(np.asarray(u0, dtype=float).copy(), INTEGER_GRID, 0.0)
    state = Scheme2State(u=u, w=u, grid=grid, params=params, model=model,
                         variant=variant, bc=bc)
    state.w = _to_w(state)
    return state


def minmod(a: float, b: float) -> float:
    """(sgn a + sgn b)/2 * min(|a|, |b|)."""
    return 0.5 * (np.sign(a) + np.sign(b)) * min(abs(a), abs(b))


def _minmod_arr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 0.5 * (np.sign(a) + np.sign(b)) * np.minimum(np.abs(a), np.abs(b))


def slopes(values: Sequence[float]) -> np.ndarray:
    """Minmod-limited undivided differences; one-sided at the endpoints."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise ValueError("need at least 3 values")
    out = np.empty_like(v)
    out[1:-1] = _minmod_arr(v[2:] - v[1:-1], v[1:-1] - v[:-2])
    out[0] = v[1] - v[0]
    out[-1] = v[-1] - v[-2]
    return out


def _ghost_slopes(v: np.ndarray, g: float, h: float) -> np.ndarray:
    """Minmod slopes against constant-value ghosts at both ends."""
    ext = np.concatenate([[g], v, [h]])
    return _minmod_arr(ext[2:] - ext[1:-1], ext[1:-1] - ext[:-2])


def _apply_d2(v: np.ndarray, g: float, h: float, dx: float) -> np.ndarray:
    """Three-point D^2 with constant ghosts; full length output."""
    ext = np.concatenate([[g], v, [h]])
    return (ext[:-2] - 2.0 * ext[1:-1] + ext[2:]) / dx ** 2


def _to_w(state: Scheme2State) -> Field:
    """w = (I - eps^2 tau D^2) u under the ghost policy of u's phase."""
    u = state.u
    g, h = state.bc[0](u.time), state.bc[1](u.time)
    c = state.params.disp
    v = u.values
    dx = state.grid.dx
    if u.phase == INTEGER_GRID:
        w = v.copy()
        if c != 0.0:
            w[1:-1] = v[1:-1] - c * (v[:-2] - 2.0 * v[1:-1] + v[2:]) / dx ** 2
    else:
        w = v - c * _apply_d2(v, g, h, dx)
    return Field(w, phase=u.phase, time=u.time)


def cfl_check(u: Field, grid: GridSpec, model: FluxModel) -> dict:
    """ok iff lam * max|f'(u_j)| < 1/2; margin is the distance to the limit."""
    speed = float(np.max(np.abs(flux_deriv(u.values, model))))
    margin = 0.5 - grid.lam * speed
    return {"ok": margin > 0.0, "margin": margin}


def predictor(state: Scheme2State) -> Field:
    """w at t + dt/2 on the current grid phase.

    Boundary nodes of an integer-phase field are replaced by the Dirichlet
    values at the half time; half-phase nodes are all interior.
    """
    grid, params, model = state.grid, state.params, state.model
    dx, lam = grid.dx, grid.lam
    dt = lam * dx
    t = state.u.time
    g, h = state.bc[0](t), state.bc[1](t)
    u, w = state.u.values, state.w.values
    f = flux(u, model)
    d2u = _apply_d2(u, g, h, dx)
    fslope = _ghost_slopes(f, flux(g, model), flux(h, model))
    wp = w + (params.epsilon * dx * d2u - fslope) * lam / 2.0
    if state.u.phase == INTEGER_GRID:
        wp[0] = state.bc[0](t + dt / 2.0)
        wp[-1] = state.bc[1](t + dt / 2.0)
    return Field(wp, phase=state.u.phase, time=t + dt / 2.0)


def _staggered_average(w: np.ndarray, slope: np.ndarray) -> np.ndarray:
    return 0.5 * (w[:-1] + w[1:]) + 0.125 * (slope[:-1] - slope[1:])


def _pad(values: np.ndarray, left: float, right: float) -> np.ndarray:
    return np.concatenate([[left], values, [right]])


def _step(state: Scheme2State) -> Scheme2State:
    """One staggered step; output phase is toggled."""
    grid, params, model = state.grid, state.params, state.model
    dx, lam = grid.dx, grid.lam
    dt = lam * dx
    eps = params.epsilon
    c = params.disp
    t = state.u.time
    g0, h0 = state.bc[0](t), state.bc[1](t)
    gh, hh = state.bc[0](t + dt / 2.0), state.bc[1](t + dt / 2.0)
    g1, h1 = state.bc[0](t + dt), state.bc[1](t + dt)
    phase = state.u.phase
    to_half = phase == INTEGER_GRID

    check = cfl_check(state.u, grid, model)
    if not check["ok"]:
        raise NumericalError(
            f"CFL violation: lambda*max|f'| = {0.5 - check['margin']:.6g} >= 0.5")

    w = state.w.values
    wbar = _staggered_average(w, _ghost_slopes(w, g0, h0))

    # predictor, converted to u at the half time
    wp = predictor(state)
    up = helmholtz_solve(wp, gh, hh, params, dx, order=2)
    fph = flux(up.values, model)
    df = fph[1:] - fph[:-1]

    if state.variant == TRAPEZOID:
        if to_half:
            ubar = helmholtz_solve(Field(wbar, HALF_GRID, t), g0, h0,
                                   params, dx, order=2).values
            rhs = (ubar - (c - eps * dt / 2.0) * _apply_d2(ubar, g0, h0, dx)
                   - lam * df)
            u_new = helmholtz_solve(Field(rhs, HALF_GRID, t + dt), g1, h1,
                                    params, dx, order=2,
                                    coefficient=c + eps * dt / 2.0).values
        else:
            ubar = helmholtz_solve(Field(_pad(wbar, g0, h0), INTEGER_GRID, t),
                                   g0, h0, params, dx, order=2).values
            d2 = (ubar[:-2] - 2.0 * ubar[1:-1] + ubar[2:]) / dx ** 2
            rhs = ubar[1:-1] - (c - eps * dt / 2.0) * d2 - lam * df
            u_new = helmholtz_solve(
                Field(_pad(rhs, g1, h1), INTEGER_GRID, t + dt), g1, h1,
                params, dx, order=2, coefficient=c + eps * dt / 2.0).values
    else:  # MIDPOINT
        wbar_mid = _staggered_average(wp.values, _ghost_slopes(wp.values, gh, hh))
        if to_half:
            ubar_mid = helmholtz_solve(Field(wbar_mid, HALF_GRID, t + dt / 2.0),
                                       gh, hh, params, dx, order=2).values
            rhs = wbar - lam * df + eps * dt * _apply_d2(ubar_mid, gh, hh, dx)
            u_new = helmholtz_solve(Field(rhs, HALF_GRID, t + dt), g1, h1,
                                    params, dx, order=2).values
        else:
            ubar_mid = helmholtz_solve(
                Field(_pad(wbar_mid, gh, hh), INTEGER_GRID, t + dt / 2.0),
                gh, hh, params, dx, order=2).values
            d2m = (ubar_mid[:-2] - 2.0 * ubar_mid[1:-1] + ubar_mid[2:]) / dx ** 2
            rhs = wbar - lam * df + eps * dt * d2m
            u_new = helmholtz_solve(
                Field(_pad(rhs, g1, h1), INTEGER_GRID, t + dt), g1, h1,
                params, dx, order=2).values

    new_phase = HALF_GRID if to_half else INTEGER_GRID
    out = replace(state, u=Field(u_new, new_phase, t + dt))
    out.w = _to_w(out)
    return out


def step_trapezoid(state: Scheme2State) -> Scheme2State:
    if state.variant != TRAPEZOID:
        state = replace(state, variant=TRAPEZOID)
    return _step(state)


def step_midpoint(state: Scheme2State) -> Scheme2State:
    if state.variant != MIDPOINT:
        state = replace(state, variant=MIDPOINT)
    return _step(state)


def run(state: Scheme2State, t_final: float, snapshot_times: Sequence[float] = ()
        ) -> list[Field]:
    """Advance in step pairs, landing exactly on each requested time.

    Snapshot times (and t_final) are hit by shrinking the final pair's dt;
    returned fields all live on the integer grid, the final state last.
    """
    if t_final <= state.u.time:
        raise ValueError("t_final must exceed the current time")
    times = sorted(set(float(s) for s in snapshot_times))
    if any(s <= state.u.time or s > t_final + 1e-12 for s in times):
        raise ValueError("snapshot times must lie in (t0, t_final]")
    targets = times if times and abs(times[-1] - t_final) < 1e-12 else times + [t_final]

    lam_nom = state.grid.lam
    dt_nom = lam_nom * state.grid.dx
    out: list[Field] = []
    for target in targets:
        while target - state.u.time > 1e-12:
            remaining = target - state.u.time
            if remaining >= 2.0 * dt_nom - 1e-12:
                state = _step(state)
                state = _step(state)
            else:
                state = _with_lam(state, remaining / 2.0 / state.grid.dx)
                state = _step(state)
                state = _step(state)
                state = _with_lam(state, lam_nom)
        out.append(state.u)
    return out


def _with_lam(state: Scheme2State, lam: float) -> Scheme2State:
    if state.grid.lam == lam:
        return state
    grid = GridSpec(L=state.grid.L, n_cells=state.grid.n_cells, dx=state.grid.dx,
                    lam=lam, x0=state.grid.x0)
    return replace(state, grid=grid)
