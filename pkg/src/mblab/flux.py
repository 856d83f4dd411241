"""Fractional-flow flux for two-phase flow and its entropy-theory helpers.

The flux is f(u) = u^2 / (u^2 + M(1-u)^2) with viscosity ratio M > 0,
extended to a total function by clamping: 0 below u=0, 1 above u=1.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FluxModel",
    "flux",
    "flux_deriv",
    "shock_speed",
    "oleinik_admissible",
    "classical_bl_profile",
]


@dataclass(frozen=True)
class FluxModel:
    """Flux family member for a fixed viscosity ratio M.

    Cached constants:
      alpha -- the state where the chord from the origin is tangent,
               f'(alpha) = f(alpha)/alpha; equals sqrt(M/(M+1)).
      D     -- f(alpha)/alpha, the largest chord slope from the origin
               (so f(u) <= D*u on [0, 1]).
      C     -- (M+1)^2/(2M), an upper bound for |f'| on [0, 1].
    """

    M: float = 2.0
    alpha: float = field(init=False)
    D: float = field(init=False)
    C: float = field(init=False)

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        a = float(np.sqrt(self.M / (self.M + 1.0)))
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "D", float(flux(a, self)) / a)
        object.__setattr__(self, "C", (self.M + 1.0) ** 2 / (2.0 * self.M))


def flux(u, model: FluxModel):
    """Clamped fractional-flow function; accepts scalars or arrays."""
    u = np.asarray(u, dtype=float)
    uc = np.clip(u, 0.0, 1.0)
    out = uc * uc / (uc * uc + model.M * (1.0 - uc) ** 2)
    if out.ndim == 0:
        return float(out)
    return out


def flux_deriv(u, model: FluxModel):
    """df/du; zero outside [0, 1] to match the clamped flux."""
    u = np.asarray(u, dtype=float)
    inside = (u > 0.0) & (u < 1.0)
    uc = np.where(inside, u, 0.5)  # dummy value, masked below
    den = (uc * uc + model.M * (1.0 - uc) ** 2) ** 2
    out = np.where(inside, 2.0 * model.M * uc * (1.0 - uc) / den, 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def shock_speed(u_l: float, u_r: float, model: FluxModel) -> float:
    """Rankine-Hugoniot speed of the jump between u_l and u_r."""
    if abs(u_l - u_r) < 1e-14:
        raise ValueError("degenerate jump: states are equal")
    return (flux(u_l, model) - flux(u_r, model)) / (u_l - u_r)


def oleinik_admissible(u_l: float, u_r: float, model: FluxModel,
                       n_samples: int = 1000) -> bool:
    """Chord condition for the jump (u_l, u_r), sampled strictly between.

    Requires (f(v)-f(u_l))/(v-u_l) >= s >= (f(v)-f(u_r))/(v-u_r) for every
    v strictly between the two states, with slack 1e-12.
    """
    s = shock_speed(u_l, u_r, model)
    lo, hi = min(u_l, u_r), max(u_l, u_r)
    v = np.linspace(lo, hi, n_samples + 2)[1:-1]
    fv = flux(v, model)
    chord_l = (fv - flux(u_l, model)) / (v - u_l)
    chord_r = (fv - flux(u_r, model)) / (v - u_r)
    return bool(np.all(chord_l >= s - 1e-12) and np.all(chord_r <= s + 1e-12))


def _invert_fprime(xi: float, lo: float, hi: float, model: FluxModel) -> float:
    """Solve f'(u) = xi for u in [lo, hi] where f' is strictly decreasing."""
    a, b = lo, hi
    fa = flux_deriv(a, model) - xi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if b - a < 1e-12:
            return mid
        fm = flux_deriv(mid, model) - xi
        if (fa > 0) == (fm > 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)


def classical_bl_profile(u_B: float, model: FluxModel, xi) -> np.ndarray:
    """Entropy solution of the Riemann problem (u_B, 0) in self-similar form.

    Evaluates u(xi) with xi = x/t.  For u_B <= alpha: a single shock moving
    at f(u_B)/u_B.  For u_B > alpha: a u_B plateau, the rarefaction fan
    obtained by inverting f' on [alpha, u_B], then the shock alpha -> 0 at
    speed f(alpha)/alpha.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.zeros_like(xi)
    a = model.alpha
    if u_B <= a + 1e-12:
        s = flux(u_B, model) / u_B
        out[xi < s] = u_B
        return out
    head = flux_deriv(u_B, model)
    tail = model.D  # = f(alpha)/alpha = f'(alpha)
    out[xi <= head] = u_B
    fan = (xi > head) & (xi < tail)
    for i in np.nonzero(fan)[0]:
        out[i] = _invert_fprime(xi[i], a, u_B, model)
    return out
