"""Parameters, channel state, (s, theta) <-> Q conversions, residuals and energies.

The steady residuals are the right-hand sides of the reduced Beris-Edwards
evolution equations with ``d/dt = 0``.  For the coupled regimes the
momentum row is written in flux form,

    Ru = -p_x + d/dy [ u_y + 2 L2 (q11 q12'' - q12 q11'') + Gamma c^2 q12 ],

with the viscous part discretised by the compact three-point stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .errors import ParameterError, RegimeError, SingularityError
from .grid import Grid

PASSIVE = "passive"
ACTIVE = "active"
CONSTANT_FLOW = "constant_flow"
REGIMES = (PASSIVE, ACTIVE, CONSTANT_FLOW)

DEFAULT_CONCENTRATION = math.sqrt(2.0 * math.pi)
# critical concentration for the isotropic-nematic transition, c scaled by 1/L
CRITICAL_CONCENTRATION = math.sqrt(1.5 * math.pi)
DEFAULT_S_TOL = 1e-3


def cospi(x: float) -> float:
    """cos(pi*x), exact when 2x is an integer."""
    r = math.fmod(x, 2.0)
    if (2.0 * r).is_integer():
        return (1.0, 0.0, -1.0, 0.0)[int(2.0 * r) % 4]
    return math.cos(math.pi * x)


def sinpi(x: float) -> float:
    """sin(pi*x), exact when 2x is an integer."""
    r = math.fmod(x, 2.0)
    if (2.0 * r).is_integer():
        return (0.0, 1.0, 0.0, -1.0)[int(2.0 * r) % 4]
    return math.sin(math.pi * x)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameters.

    ``bulk_off`` drops the Landau-de Gennes bulk force (the ``L* = inf``
    runs); ``l_star`` is then ignored.
    """

    l_star: float = 1e-3
    l2: float = 1e-3
    p_x: float = 0.0
    omega: float = 0.0
    gamma_act: float = 0.0
    conc: float = DEFAULT_CONCENTRATION
    regime: str = PASSIVE
    bulk_off: bool = False
    l1: float = 1.0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ParameterError(f"unknown regime {self.regime!r}")
        if not self.bulk_off and not self.l_star > 0:
            raise ParameterError("l_star must be positive unless bulk_off is set")
        if not -0.5 <= self.omega <= 0.5:
            raise ParameterError(f"omega = {self.omega} outside [-1/2, 1/2]")
        if self.l2 < 0:
            raise ParameterError("l2 must be nonnegative")
        if not self.conc > 0:
            raise ParameterError("concentration must be positive")
        if not self.l1 > 0:
            raise ParameterError("l1 must be positive")

    @property
    def eps(self) -> float:
        return 0.0 if self.bulk_off else 1.0 / self.l_star

    @property
    def coupled(self) -> bool:
        return self.regime != CONSTANT_FLOW

    @property
    def active_flux(self) -> float:
        """Gamma * c^2 (zero outside the active regime)."""
        return self.gamma_act * self.conc**2 if self.regime == ACTIVE else 0.0

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChannelState:
    grid: Grid
    q11: np.ndarray
    q12: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        for name in ("q11", "q12", "u"):
            object.__setattr__(self, name, _frozen(self.grid.field(getattr(self, name))))

    @classmethod
    def from_vector(cls, grid: Grid, x) -> "ChannelState":
        x = np.asarray(x, dtype=float).reshape(grid.n_nodes, 3)
        return cls(grid, x[:, 0], x[:, 1], x[:, 2])

    def to_vector(self) -> np.ndarray:
        return np.column_stack((self.q11, self.q12, self.u)).ravel()

    def replace(self, **fields) -> "ChannelState":
        return replace(self, **fields)


@dataclass(frozen=True)
class DirectorView:
    """Order parameter and unwrapped director angle.

    ``jumps`` lists ``(left, right, dtheta)`` for every run of singular
    nodes: the last regular node before it, the first after, and the
    angle difference across.
    """

    grid: Grid
    s: np.ndarray
    theta: np.ndarray
    singular_nodes: frozenset = field(default_factory=frozenset)
    jumps: tuple = ()


def _nearest_branch(value: float, target: float) -> float:
    return value + math.pi * round((target - value) / math.pi)


def q_to_director(state: ChannelState, params: ModelParams, s_tol: float = DEFAULT_S_TOL) -> DirectorView:
    """Extract (s, theta) from the Q components.

    theta = atan2(q12, q11)/2 is defined modulo pi.  Regular stretches
    between singular nodes are unwrapped continuously; the first is
    anchored at theta(-1) = -omega*pi, the last at theta(1) = omega*pi,
    and intermediate ones continue from their left neighbour.  Singular
    nodes get the mean of the adjacent regular values.
    """
    if not s_tol > 0:
        raise ParameterError("s_tol must be positive")
    q11, q12 = state.q11, state.q12
    s = 2.0 * np.hypot(q11, q12)
    raw = 0.5 * np.arctan2(q12, q11)
    singular = s < s_tol
    theta = np.zeros_like(s)
    runs = _regular_runs(~singular)
    anchor_left = -params.omega * math.pi
    anchor_right = params.omega * math.pi
    for k, (a, b) in enumerate(runs):
        seg = np.unwrap(raw[a:b], period=math.pi)
        if k == 0:
            seg += _nearest_branch(seg[0], anchor_left) - seg[0]
        elif k == len(runs) - 1:
            seg += _nearest_branch(seg[-1], anchor_right) - seg[-1]
        else:
            seg += _nearest_branch(seg[0], theta[runs[k - 1][1] - 1]) - seg[0]
        theta[a:b] = seg
    jumps = []
    for (a0, b0), (a1, b1) in zip(runs, runs[1:]):
        jumps.append((b0 - 1, a1, float(theta[a1] - theta[b0 - 1])))
        theta[b0:a1] = 0.5 * (theta[b0 - 1] + theta[a1])
    if runs:
        theta[: runs[0][0]] = theta[runs[0][0]]
        theta[runs[-1][1]:] = theta[runs[-1][1] - 1]
    s.setflags(write=False)
    theta.setflags(write=False)
    return DirectorView(
        state.grid,
        s,
        theta,
        frozenset(int(i) for i in np.flatnonzero(singular)),
        tuple(jumps),
    )


def _regular_runs(mask) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        elif not ok and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(mask)))
    return runs


def director_to_q(s, theta) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if s.shape != theta.shape:
        raise ValueError("s and theta must live on the same grid")
    return 0.5 * s * np.cos(2.0 * theta), 0.5 * s * np.sin(2.0 * theta)


def boundary_values(params: ModelParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """((q11, q12) at y = -1, (q11, q12) at y = +1)."""
    c = 0.5 * cospi(2.0 * params.omega)
    sn = 0.5 * sinpi(2.0 * params.omega)
    return (c, -sn), (c, sn)


def apply_boundary_conditions(state: ChannelState, params: ModelParams) -> ChannelState:
    (a11, a12), (b11, b12) = boundary_values(params)
    q11 = np.array(state.q11)
    q12 = np.array(state.q12)
    u = np.array(state.u)
    q11[0], q12[0] = a11, a12
    q11[-1], q12[-1] = b11, b12
    if params.coupled:
        u[0] = u[-1] = 0.0
    return ChannelState(state.grid, q11, q12, u)


def _residual(state: ChannelState, params: ModelParams):
    g = state.grid
    return kernels.residual(
        state.q11, state.q12, state.u, g.h, params.eps, params.p_x,
        params.l2, params.active_flux, params.coupled,
    )


def residual_passive(state: ChannelState, params: ModelParams):
    """(R11, R12, Ru) for the passive flow system."""
    if params.regime != PASSIVE:
        raise RegimeError(f"residual_passive called with regime {params.regime!r}")
    return _residual(state, params)


def residual_active(state: ChannelState, params: ModelParams):
    if params.regime != ACTIVE:
        raise RegimeError(f"residual_active called with regime {params.regime!r}")
    return _residual(state, params)


def residual_constant_flow(q11, q12, grid: Grid, params: ModelParams):
    """(R11, R12) for the static Q system with frozen velocity."""
    if params.regime != CONSTANT_FLOW:
        raise RegimeError(f"residual_constant_flow called with regime {params.regime!r}")
    z = np.zeros(grid.n_nodes)
    r11, r12, _ = kernels.residual(
        grid.field(q11), grid.field(q12), z, grid.h, params.eps, 0.0, 0.0, 0.0, False
    )
    return r11, r12


def residual(state: ChannelState, params: ModelParams):
    """Residual for whichever regime ``params`` selects; Ru is zero for constant flow."""
    return _residual(state, params)


def energy_q(q11, q12, grid: Grid, params: ModelParams) -> float:
    """Landau-de Gennes energy of the static Q system.

    The elastic term is integrated exactly for the piecewise-linear
    interpolant, the bulk term by the trapezoid rule; with this choice the
    nodal gradient of the energy is ``-2 h`` times the discrete residual.
    """
    q11 = grid.field(q11)
    q12 = grid.field(q12)
    elastic = float(np.sum(np.diff(q11) ** 2 + np.diff(q12) ** 2)) / grid.h
    r = q11 * q11 + q12 * q12
    return elastic + grid.integrate(params.eps * r * (2.0 * r - 1.0))


def energy_stheta(view: DirectorView, params: ModelParams) -> float:
    if view.singular_nodes or np.any(view.s <= 0):
        raise SingularityError("energy in (s, theta) needs s > 0 everywhere")
    g = view.grid
    s = view.s
    ds = g.d1(s)
    dth = g.d1(view.theta)
    dens = 0.25 * ds**2 + s**2 * dth**2 + 0.25 * params.eps * s**2 * (0.5 * s**2 - 1.0)
    return g.integrate(dens)


def energy_or(q12, grid: Grid, params: ModelParams) -> float:
    """Energy restricted to the q11 = 0 branch."""
    q12 = grid.field(q12)
    elastic = float(np.sum(np.diff(q12) ** 2)) / grid.h
    return elastic + grid.integrate(params.eps * q12**2 * (2.0 * q12**2 - 1.0))


def b_invariant(view: DirectorView) -> np.ndarray:
    """Nodal s^2 theta' (constant on smooth constant-flow solutions)."""
    return view.s**2 * view.grid.d1(view.theta)


def first_integral(view: DirectorView, params: ModelParams, b: float | None = None) -> np.ndarray:
    """(s')^2 + 4B^2/s^2 - eps (s^4/2 - s^2), constant on smooth branches."""
    g = view.grid
    s = view.s
    if b is None:
        b = float(np.mean(b_invariant(view)[1:-1]))
    return g.d1(s) ** 2 + 4.0 * b * b / s**2 - params.eps * (0.5 * s**4 - s**2)


@dataclass(frozen=True)
class PhysicalParams:
    rho: float
    mu: float
    gamma: float
    kappa: float
    A: float
    C: float
    L: float
    alpha2: float = 0.0


def nondimensionalize(phys: PhysicalParams, **overrides) -> ModelParams:
    """Map material constants to the dimensionless groups."""
    if not phys.A < 0:
        raise ParameterError("A must be negative (nematic phase)")
    if not phys.C > 0:
        raise ParameterError("C must be positive")
    if not phys.L > 0:
        raise ParameterError("L must be positive")
    if not (phys.kappa > 0 and phys.mu > 0 and phys.gamma > 0):
        raise ParameterError("kappa, mu and gamma must be positive")
    values = dict(
        l_star=-phys.kappa / (phys.A * phys.L**2),
        l2=-2.0 * phys.A * phys.gamma / (phys.C * phys.mu),
        gamma_act=phys.alpha2 * phys.gamma / (phys.kappa * phys.mu) * math.sqrt(-2.0 * phys.A / phys.C),
        l1=phys.rho * phys.kappa / (phys.mu * phys.gamma) if phys.rho > 0 else 1.0,
    )
    values.update(overrides)
    return ModelParams(**values)
