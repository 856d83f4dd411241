"""Discrete spatial operators shared by the time-stepping schemes.

Node-centered fields on [x0, x0+L] carry n_cells+1 values with the
boundary (Dirichlet) values stored in the array; half-grid fields carry
n_cells values at the staggered points x0 + (j+1/2)dx.  The elliptic
operator is (I - c D^2) with c = eps^2 tau (or a scheme-supplied
coefficient); its inverse is a direct banded solve.

Boundary closures for half-grid fields: a solve places the boundary value
midway between the first unknown and a reflected ghost (linear
interpolation to the physical endpoint), while explicit stencil
applications use the boundary value itself as a constant ghost.  The two
agree whenever the data is flat next to the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import solve_banded

from .errors import NumericalError

__all__ = [
    "GridSpec",
    "Field",
    "MBLParams",
    "INTEGER_GRID",
    "HALF_GRID",
    "d2_central",
    "helmholtz_apply",
    "helmholtz_solve",
    "weighted_h1_norm",
]

INTEGER_GRID = "integer_grid"
HALF_GRID = "half_grid"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [x0, x0+L] with n_cells cells and time ratio lam = dt/dx."""

    L: float
    n_cells: int
    dx: float = None  # type: ignore[assignment]
    lam: float = 0.1
    x0: float = 0.0

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.n_cells}")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.dx is None:
            object.__setattr__(self, "dx", self.L / self.n_cells)
        if abs(self.dx * self.n_cells - self.L) > 1e-12 * self.L:
            raise ValueError(
                f"dx*n_cells = {self.dx * self.n_cells!r} does not match L = {self.L!r}")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")

    def nodes(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n_cells + 1)

    def centers(self) -> np.ndarray:
        return self.x0 + self.dx * (np.arange(self.n_cells) + 0.5)


@dataclass(frozen=True)
class MBLParams:
    """Model parameters: diffusion scale epsilon and dispersion ratio tau.

    epsilon = 0 is allowed so that the inviscid conservation identities can
    be exercised; tau = 0 degenerates to the purely viscous equation.
    """

    epsilon: float
    tau: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")

    @property
    def disp(self) -> float:
        """The elliptic coefficient eps^2 * tau."""
        return self.epsilon ** 2 * self.tau


@dataclass
class Field:
    """Values on one phase of the staggered grid at a given time."""

    values: np.ndarray
    phase: str = INTEGER_GRID
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.phase not in (INTEGER_GRID, HALF_GRID):
            raise ValueError(f"unknown phase {self.phase!r}")
        _check_finite(self.values)


def _check_finite(values: np.ndarray) -> None:
    if not np.all(np.isfinite(values)):
        raise NumericalError("field contains NaN/Inf values")


def d2_central(f: Field, dx: float, bc_left: float, bc_right: float) -> Field:
    """Three-point second difference; ghost neighbors take the supplied values."""
    v = f.values
    if v.size < 3:
        raise ValueError("field too short for a second difference")
    ext = np.empty(v.size + 2)
    ext[0] = bc_left
    ext[1:-1] = v
    ext[-1] = bc_right
    out = (ext[:-2] - 2.0 * ext[1:-1] + ext[2:]) / dx ** 2
    _check_finite(out)
    return Field(out, phase=f.phase, time=f.time)


# one-sided second-derivative closures, exact through degree 4
_LEFT_EDGE = np.array([35.0, -104.0, 114.0, -56.0, 11.0]) / 12.0
_LEFT_IN = np.array([11.0, -20.0, 6.0, 4.0, -1.0]) / 12.0


def _d2_order4(v: np.ndarray, dx: float) -> np.ndarray:
    """Five-point fourth-order second derivative with one-sided closures."""
    n = v.size
    if n < 5:
        raise ValueError("need at least 5 values for the 5-point stencil")
    out = np.empty(n)
    out[2:-2] = (-v[:-4] + 16.0 * v[1:-3] - 30.0 * v[2:-2]
                 + 16.0 * v[3:-1] - v[4:]) / (12.0 * dx ** 2)
    out[0] = _LEFT_EDGE @ v[:5] / dx ** 2
    out[1] = _LEFT_IN @ v[:5] / dx ** 2
    out[-1] = _LEFT_EDGE @ v[-5:][::-1] / dx ** 2
    out[-2] = _LEFT_IN @ v[-5:][::-1] / dx ** 2
    return out


def helmholtz_apply(u: Field, params: MBLParams, dx: float, order: int = 2) -> Field:
    """w = u - eps^2 tau D^2 u on a node-centered field; boundary rows are identity."""
    if u.phase != INTEGER_GRID:
        raise ValueError("helmholtz_apply expects a node-centered field")
    v = u.values
    c = params.disp
    w = v.copy()
    if c != 0.0:
        if order == 2:
            w[1:-1] = v[1:-1] - c * (v[:-2] - 2.0 * v[1:-1] + v[2:]) / dx ** 2
        elif order == 4:
            w[1:-1] = v[1:-1] - c * _d2_order4(v, dx)[1:-1]
        else:
            raise ValueError(f"order must be 2 or 4, got {order}")
    elif order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    _check_finite(w)
    return Field(w, phase=u.phase, time=u.time)


def _solve_node2(w: np.ndarray, bc_l: float, bc_r: float, c: float, dx: float) -> np.ndarray:
    n = w.size - 1
    ct = c / dx ** 2
    rhs = w[1:-1].copy()
    ab = np.zeros((3, n - 1))
    ab[0, 1:] = -ct
    ab[1, :] = 1.0 + 2.0 * ct
    ab[2, :-1] = -ct
    rhs[0] += ct * bc_l
    rhs[-1] += ct * bc_r
    out = np.empty(n + 1)
    out[0] = bc_l
    out[-1] = bc_r
    out[1:-1] = solve_banded((1, 1), ab, rhs)
    return out


def _solve_node4(w: np.ndarray, bc_l: float, bc_r: float, c: float, dx: float) -> np.ndarray:
    n = w.size - 1
    if n < 5:
        raise ValueError("order-4 solve needs at least 5 cells")
    ct = c / (12.0 * dx ** 2)
    m = n - 1  # unknowns u_1 .. u_{n-1}
    ab = np.zeros((7, m))  # bands (3, 3)
    rhs = w[1:-1].copy()

    def put(row: int, col: int, val: float) -> None:
        ab[3 + row - col, col] += val

    for i in range(2, m - 2):
        put(i, i, 1.0 + 30.0 * ct)
        put(i, i - 1, -16.0 * ct)
        put(i, i + 1, -16.0 * ct)
        put(i, i - 2, ct)
        put(i, i + 2, ct)
    # j=1: one-sided stencil over nodes 0..4
    put(0, 0, 1.0 + 20.0 * ct)
    put(0, 1, -6.0 * ct)
    put(0, 2, -4.0 * ct)
    put(0, 3, ct)
    rhs[0] += 11.0 * ct * bc_l
    # j=2: symmetric stencil, node 0 known
    put(1, 0, -16.0 * ct)
    put(1, 1, 1.0 + 30.0 * ct)
    put(1, 2, -16.0 * ct)
    put(1, 3, ct)
    rhs[1] += -ct * bc_l
    # mirrored rows at the right end
    put(m - 1, m - 1, 1.0 + 20.0 * ct)
    put(m - 1, m - 2, -6.0 * ct)
    put(m - 1, m - 3, -4.0 * ct)
    put(m - 1, m - 4, ct)
    rhs[m - 1] += 11.0 * ct * bc_r
    put(m - 2, m - 1, -16.0 * ct)
    put(m - 2, m - 2, 1.0 + 30.0 * ct)
    put(m - 2, m - 3, -16.0 * ct)
    put(m - 2, m - 4, ct)
    rhs[m - 2] += -ct * bc_r

    out = np.empty(n + 1)
    out[0] = bc_l
    out[-1] = bc_r
    out[1:-1] = solve_banded((3, 3), ab, rhs)
    return out


def _solve_half2(w: np.ndarray, bc_l: float, bc_r: float, c: float, dx: float) -> np.ndarray:
    """Half-grid solve; reflected ghosts put the boundary value at the endpoint."""
    n = w.size
    ct = c / dx ** 2
    ab = np.zeros((3, n))
    ab[0, 1:] = -ct
    ab[1, :] = 1.0 + 2.0 * ct
    ab[2, :-1] = -ct
    rhs = w.copy()
    ab[1, 0] += ct
    rhs[0] += 2.0 * ct * bc_l
    ab[1, -1] += ct
    rhs[-1] += 2.0 * ct * bc_r
    return solve_banded((1, 1), ab, rhs)


def _solve_half4(w: np.ndarray, bc_l: float, bc_r: float, c: float, dx: float) -> np.ndarray:
    """Order-4 half-grid solve with two reflected ghost cells per side."""
    n = w.size
    if n < 5:
        raise ValueError("order-4 solve needs at least 5 cells")
    ct = c / (12.0 * dx ** 2)
    ab = np.zeros((5, n))  # bands (2, 2)
    rhs = w.copy()

    def put(row: int, col: int, val: float) -> None:
        ab[2 + row - col, col] += val

    for i in range(2, n - 2):
        put(i, i, 1.0 + 30.0 * ct)
        put(i, i - 1, -16.0 * ct)
        put(i, i + 1, -16.0 * ct)
        put(i, i - 2, ct)
        put(i, i + 2, ct)
    # ghosts: v(-1/2) = 2 bc - v(1/2), v(-3/2) = 2 bc - v(3/2)
    put(0, 0, 1.0 + 46.0 * ct)
    put(0, 1, -17.0 * ct)
    put(0, 2, ct)
    rhs[0] += 30.0 * ct * bc_l
    put(1, 0, -17.0 * ct)
    put(1, 1, 1.0 + 30.0 * ct)
    put(1, 2, -16.0 * ct)
    put(1, 3, ct)
    rhs[1] += -2.0 * ct * bc_l
    put(n - 1, n - 1, 1.0 + 46.0 * ct)
    put(n - 1, n - 2, -17.0 * ct)
    put(n - 1, n - 3, ct)
    rhs[n - 1] += 30.0 * ct * bc_r
    put(n - 2, n - 1, -17.0 * ct)
    put(n - 2, n - 2, 1.0 + 30.0 * ct)
    put(n - 2, n - 3, -16.0 * ct)
    put(n - 2, n - 4, ct)
    rhs[n - 2] += -2.0 * ct * bc_r
    return solve_banded((2, 2), ab, rhs)


def helmholtz_solve(w: Field, bc_left: float, bc_right: float, params: MBLParams,
                    dx: float, order: int = 2, coefficient: float = None) -> Field:
    """Solve (I - c D^2) u = w under Dirichlet data; c = eps^2 tau by default.

    Node-centered fields pin the endpoints to the boundary values; half-grid
    fields use reflected ghosts so the boundary value is interpolated at the
    physical endpoint.  ``coefficient`` overrides c for scheme-internal
    operators like (I - (eps^2 tau + eps dt/2) D^2).
    """
    c = params.disp if coefficient is None else coefficient
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    v = w.values
    if c == 0.0:
        out = v.copy()
        if w.phase == INTEGER_GRID:
            out[0] = bc_left
            out[-1] = bc_right
    elif w.phase == INTEGER_GRID:
        solver = _solve_node2 if order == 2 else _solve_node4
        out = solver(v, bc_left, bc_right, c, dx)
    else:
        solver = _solve_half2 if order == 2 else _solve_half4
        out = solver(v, bc_left, bc_right, c, dx)
    _check_finite(out)
    return Field(out, phase=w.phase, time=w.time)


def weighted_h1_norm(y: Field, params: MBLParams, dx: float) -> float:
    """sqrt( integral of y^2 + (eps sqrt(tau) y_x)^2 ), trapezoid/forward-difference form."""
    v = y.values
    s = params.epsilon * np.sqrt(params.tau)
    weights = np.ones_like(v)
    weights[0] = weights[-1] = 0.5
    sq = dx * float(weights @ (v * v))
    if v.size > 1:
        dv = np.diff(v) / dx
        sq += dx * float((s * dv) @ (s * dv))
    return float(np.sqrt(sq))
