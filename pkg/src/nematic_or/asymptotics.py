"""Closed-form limiting and boundary-layer profiles.

These serve two purposes: Newton seeds for the OR-type branches and
baselines the numerical solutions are compared against.  Seeds are built
in Q variables half by half, so a theta jump at y = 0 costs nothing when
the wall is fully melted (s_min = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import GridSizeError, IterationError, ParameterError
from .grid import Grid
from .model import (
    ChannelState,
    ModelParams,
    apply_boundary_conditions,
    cospi,
    director_to_q,
    sinpi,
)

EPS_TO_0 = "eps_to_0"
EPS_TO_INF = "eps_to_inf"
PASSIVE_OR = "passive_or"
ACTIVE_OR_EXPLICIT = "active_or_explicit"
ACTIVE_OR_IMPLICIT = "active_or_implicit"
PROVENANCES = (EPS_TO_0, EPS_TO_INF, PASSIVE_OR, ACTIVE_OR_EXPLICIT, ACTIVE_OR_IMPLICIT)


@dataclass(frozen=True)
class AsymptoticProfile:
    """A limiting profile on a grid.

    ``theta`` stores the mean of the one-sided limits at the y = 0 node;
    ``theta_jump`` is theta(0+) - theta(0-).  ``q11``/``q12`` are the
    seed fields, assembled separately on each half.
    """

    grid: Grid
    s: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    q11: np.ndarray
    q12: np.ndarray
    k: int
    s_min: float
    provenance: str
    theta_jump: float = 0.0

    def state(self, params: ModelParams) -> ChannelState:
        st = ChannelState(self.grid, self.q11, self.q12, self.u)
        return apply_boundary_conditions(st, params)


def limit_small_eps(omega: float, grid: Grid):
    """Harmonic Q profile of the eps -> 0 limit: (q11, q12, s, theta)."""
    y = grid.y
    c = cospi(2.0 * omega)
    sn = sinpi(2.0 * omega)
    q11 = np.full(grid.n_nodes, 0.5 * c)
    q12 = 0.5 * y * sn
    s = np.sqrt(c * c + (y * sn) ** 2)
    theta = 0.5 * np.arctan2(y * sn, c)
    return q11, q12, s, theta


def limit_large_eps(omega: float, grid: Grid):
    """eps -> inf limit: s = 1 and a uniformly twisting director."""
    return np.ones(grid.n_nodes), omega * math.pi * grid.y


def passive_u_profile(params: ModelParams, grid: Grid) -> np.ndarray:
    y = grid.y
    return params.p_x * (y * y - 1.0) / (2.0 + params.l2)


def composite_s(params: ModelParams, grid: Grid, s_min: float) -> np.ndarray:
    """Outer s = 1 joined to the linearised inner layer about y = 0."""
    if params.bulk_off or not params.l_star > 0:
        raise ParameterError("the boundary-layer profile needs a finite positive L*")
    if not 0.0 <= s_min <= 1.0:
        raise ParameterError(f"s_min = {s_min} outside [0, 1]")
    y = grid.y
    return 1.0 + (s_min - 1.0) * np.exp(-math.sqrt(2.0) * np.abs(y) / math.sqrt(params.l_star))


def _assemble(grid, s, th_right, th_left, u, k, s_min, provenance) -> AsymptoticProfile:
    """Combine one-sided theta branches (valid on y >= 0 / y <= 0)."""
    y = grid.y
    right = y > 0
    left = y < 0
    theta = np.where(right, th_right, th_left)
    q11r, q12r = director_to_q(s, th_right)
    q11l, q12l = director_to_q(s, th_left)
    q11 = np.where(right, q11r, q11l)
    q12 = np.where(right, q12r, q12l)
    mid = ~(right | left)
    theta[mid] = 0.5 * (th_right[mid] + th_left[mid])
    q11[mid] = 0.5 * (q11r[mid] + q11l[mid])
    q12[mid] = 0.5 * (q12r[mid] + q12l[mid])
    if s_min == 0.0:
        q11[mid] = 0.0
        q12[mid] = 0.0
    jump = _at_zero(th_right, grid) - _at_zero(th_left, grid)
    return AsymptoticProfile(grid, s, theta, u, q11, q12, int(k), float(s_min), provenance, jump)


def _at_zero(branch, grid) -> float:
    """Value of a one-sided branch extrapolated to y = 0."""
    c = grid.center
    if c is not None:
        return float(branch[c])
    j = grid.n_cells // 2
    y0, y1 = grid.y[j], grid.y[j + 1]
    return float(branch[j] + (branch[j + 1] - branch[j]) * (0.0 - y0) / (y1 - y0))


def _passive_outer(params, grid, k):
    y = grid.y
    cubic = params.p_x / (2.0 + params.l2) * (y**3 / 6.0 - y / 6.0)
    right = cubic + 0.5 * k * math.pi * (y - 1.0) + params.omega * math.pi
    left = cubic + 0.5 * k * math.pi * (y + 1.0) - params.omega * math.pi
    return right, left


def passive_or_profile(params: ModelParams, grid: Grid, k: int = 0, s_min: float = 0.0) -> AsymptoticProfile:
    """Composite OR-type profile for Poiseuille-driven passive flow."""
    s = composite_s(params, grid, s_min)
    right, left = _passive_outer(params, grid, k)
    return _assemble(grid, s, right, left, passive_u_profile(params, grid), k, s_min, PASSIVE_OR)


def active_u_profile(params: ModelParams, grid: Grid) -> np.ndarray:
    """Velocity for an OR ansatz with sin(2 theta) = +1 / -1 on the left / right half."""
    y = grid.y
    d = 2.0 + params.l2
    gc2 = params.gamma_act * params.conc**2
    u = params.p_x * (y * y - 1.0) / d
    return u + np.where(y > 0, gc2 * (y - 1.0) / d, -gc2 * (y + 1.0) / d)


def active_or_profile(params: ModelParams, grid: Grid, k: int = 0, s_min: float = 0.0) -> AsymptoticProfile:
    s = composite_s(params, grid, s_min)
    right, left = _passive_outer(params, grid, k)
    y = grid.y
    a = params.gamma_act * params.conc**2 / (2.0 + params.l2)
    right = right + a * (y * y / 4.0 - y / 4.0)
    left = left - a * (y * y / 4.0 + y / 4.0)
    return _assemble(grid, s, right, left, active_u_profile(params, grid), k, s_min, ACTIVE_OR_EXPLICIT)


def _halves(grid):
    c = grid.center
    if c is None:
        raise GridSizeError("the implicit active profile needs a node at y = 0 (even n_cells)")
    return c


def _theta_from_u(params, grid, k, u_left, u_right):
    """Outer theta from the nested integrals of u - u(0) on each half.

    ``u_left`` covers nodes 0..c, ``u_right`` nodes c..n; both include the
    one-sided value at y = 0.  Returns the one-sided theta branches on
    the same node ranges.
    """
    c = _halves(grid)
    y = grid.y
    yr = y[c:]
    yl = y[: c + 1]
    wr = 0.5 * (u_right - u_right[0])
    wl = 0.5 * (u_left - u_left[-1])
    ir = cumulative_simpson(wr, x=yr, initial=0.0)
    il = cumulative_simpson(wl, x=yl, initial=0.0)
    kp = 0.5 * k * math.pi
    om = params.omega * math.pi
    th_r = -(ir[-1] - ir) + (kp - ir[-1]) * (yr - 1.0) + om
    th_l = il + (kp - il[-1]) * (yl + 1.0) - om
    return th_l, th_r


def _u_from_theta(params, grid, s, th_l, th_r):
    """Velocity from the integrated momentum balance for given (s, theta).

    The integration constant is fixed by the no-slip condition at y = 1,
    so it stays correct for non-symmetric iterates.
    """
    c = _halves(grid)
    y = grid.y
    gc2 = params.gamma_act * params.conc**2
    g = 1.0 + 0.5 * params.l2 * s * s

    def pieces(b0):
        fl = (2 * params.p_x * y[: c + 1] + 2 * b0 - gc2 * s[: c + 1] * np.sin(2 * th_l)) / (2 * g[: c + 1])
        fr = (2 * params.p_x * y[c:] + 2 * b0 - gc2 * s[c:] * np.sin(2 * th_r)) / (2 * g[c:])
        ul = cumulative_simpson(fl, x=y[: c + 1], initial=0.0)
        ur = ul[-1] + cumulative_simpson(fr, x=y[c:], initial=0.0)
        return ul, ur

    _, ur0 = pieces(0.0)
    inv_g = 1.0 / g
    ig = cumulative_simpson(inv_g[: c + 1], x=y[: c + 1])[-1] + cumulative_simpson(inv_g[c:], x=y[c:])[-1]
    b0 = -ur0[-1] / ig
    return pieces(b0)


def _implicit_branches(params, grid, k, u, s, fixed_point, damping, tol, max_iter):
    c = _halves(grid)
    u = grid.field(u)
    ul, ur = u[: c + 1].copy(), u[c:].copy()
    th_l, th_r = _theta_from_u(params, grid, k, ul, ur)
    if fixed_point:
        trace = []
        for _ in range(max_iter):
            ul, ur = _u_from_theta(params, grid, s, th_l, th_r)
            new_l, new_r = _theta_from_u(params, grid, k, ul, ur)
            change = max(np.max(np.abs(new_l - th_l)), np.max(np.abs(new_r - th_r)))
            trace.append(float(change))
            th_l = th_l + damping * (new_l - th_l)
            th_r = th_r + damping * (new_r - th_r)
            if change < tol:
                break
        else:
            raise IterationError(f"fixed point did not settle in {max_iter} iterations", trace)
        u = np.concatenate((ul[:-1], [0.5 * (ul[-1] + ur[0])], ur[1:]))
    # extend each branch over the whole grid so _assemble can mask by sign
    full_l = np.concatenate((th_l, np.full(grid.n_nodes - c - 1, th_l[-1])))
    full_r = np.concatenate((np.full(c, th_r[0]), th_r))
    return full_l, full_r, u


def active_theta_implicit(
    params: ModelParams,
    grid: Grid,
    k: int = 0,
    u=None,
    *,
    s_min: float = 0.0,
    fixed_point: bool = False,
    damping: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> np.ndarray:
    """Outer theta for the active system from its integral representation.

    With ``u`` given, theta is evaluated once by quadrature of the nested
    integrals of u - u(0) on each half.  With ``fixed_point`` the velocity
    (from the integrated momentum balance with the composite s) and theta
    are iterated with damping, starting from the OR-ansatz velocity, until
    successive thetas differ by less than ``tol``.  The y = 0 node holds
    the mean of the one-sided limits.
    """
    return active_or_implicit_profile(
        params, grid, k, s_min, u=u, fixed_point=fixed_point,
        damping=damping, tol=tol, max_iter=max_iter,
    ).theta


def active_or_implicit_profile(
    params: ModelParams,
    grid: Grid,
    k: int = 0,
    s_min: float = 0.0,
    *,
    u=None,
    fixed_point: bool = True,
    damping: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 50,
) -> AsymptoticProfile:
    s = np.ones(grid.n_nodes) if params.bulk_off else composite_s(params, grid, s_min)
    if u is None:
        u = active_u_profile(params, grid)
    th_l, th_r, u = _implicit_branches(params, grid, k, u, s, fixed_point, damping, tol, max_iter)
    return _assemble(grid, s, th_r, th_l, u, k, s_min, ACTIVE_OR_IMPLICIT)


def profile(mode: str, params: ModelParams, grid: Grid, k: int = 0, s_min: float = 0.0) -> AsymptoticProfile:
    """Build any of the supported profiles by name."""
    if mode == EPS_TO_0:
        q11, q12, s, theta = limit_small_eps(params.omega, grid)
        return AsymptoticProfile(grid, s, theta, np.zeros(grid.n_nodes), q11, q12, 0, float(s.min()), mode)
    if mode == EPS_TO_INF:
        s, theta = limit_large_eps(params.omega, grid)
        q11, q12 = director_to_q(s, theta)
        return AsymptoticProfile(grid, s, theta, np.zeros(grid.n_nodes), q11, q12, 0, 1.0, mode)
    if mode == PASSIVE_OR:
        return passive_or_profile(params, grid, k, s_min)
    if mode == ACTIVE_OR_EXPLICIT:
        return active_or_profile(params, grid, k, s_min)
    if mode == ACTIVE_OR_IMPLICIT:
        return active_or_implicit_profile(params, grid, k, s_min)
    raise ParameterError(f"unknown profile mode {mode!r}")
