"""Steady-state solvers: pseudo-time gradient flow, damped Newton, linear stability."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, eigvals, solve_banded

from ._backend import kernels
from .errors import (
    DivergenceError,
    FactorizationError,
    NumericalError,
    ParameterError,
    StagnationError,
)
from .grid import Grid
from .model import (
    CONSTANT_FLOW,
    ChannelState,
    ModelParams,
    apply_boundary_conditions,
    residual,
)

log = logging.getLogger(__name__)

STABLE = "stable"
UNSTABLE = "unstable"
MARGINAL = "marginal"
STABILITY_TOL = 1e-8


@dataclass(frozen=True)
class SolveConfig:
    dt: float = 1e-3
    flow_tol: float = 1e-6
    newton_tol: float = 1e-10
    step_tol: float = 1e-10
    max_steps: int = 2_000_000
    max_iter: int = 50
    damping_max_halvings: int = 20

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError("dt must be positive")
        if not (self.flow_tol > 0 and self.newton_tol > 0):
            raise ParameterError("tolerances must be positive")
        if self.max_steps < 0 or self.max_iter < 0 or self.damping_max_halvings < 0:
            raise ParameterError("iteration limits must be nonnegative")


@dataclass(frozen=True)
class StabilityReport:
    rightmost_re: float
    verdict: str
    n_unstable: int
    eigenvalues: np.ndarray = field(repr=False, default=None)


@dataclass(frozen=True)
class SolveReport:
    final_state: ChannelState
    converged: bool
    iterations: int
    residual_trace: np.ndarray = field(repr=False)
    energy_trace: np.ndarray | None = field(default=None, repr=False)
    stability: StabilityReport | None = None
    method: str = ""

    @property
    def residual(self) -> float:
        return float(self.residual_trace[-1]) if len(self.residual_trace) else math.nan


@dataclass(frozen=True)
class BandedMatrix:
    """LAPACK general band storage, ``ab[ku + r - c, c] = A[r, c]``."""

    ab: np.ndarray
    kl: int
    ku: int

    @property
    def shape(self):
        n = self.ab.shape[1]
        return (n, n)

    def to_dense(self) -> np.ndarray:
        n = self.ab.shape[1]
        a = np.zeros((n, n))
        for d in range(-self.kl, self.ku + 1):
            row = self.ku - d
            if d >= 0:
                idx = np.arange(n - d)
                a[idx, idx + d] = self.ab[row, d:]
            else:
                idx = np.arange(n + d)
                a[idx - d, idx] = self.ab[row, : n + d]
        return a

    def solve(self, rhs) -> np.ndarray:
        try:
            x = solve_banded((self.kl, self.ku), self.ab, rhs, check_finite=False)
        except (LinAlgError, ValueError) as exc:
            raise FactorizationError(f"banded factorisation failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise FactorizationError("banded solve produced non-finite values")
        return x


def _residual_vector(state: ChannelState, params: ModelParams) -> np.ndarray:
    r11, r12, ru = residual(state, params)
    return np.column_stack((r11, r12, ru)).ravel()


def _sup(v) -> float:
    return float(np.max(np.abs(v)))


def assemble_jacobian(state: ChannelState, params: ModelParams) -> BandedMatrix:
    """Banded Jacobian of the steady residual; Dirichlet rows are identity."""
    g = state.grid
    ab = kernels.jacobian_band(
        state.q11, state.q12, state.u, g.h, params.eps, params.p_x,
        params.l2, params.active_flux, params.coupled,
    )
    return BandedMatrix(ab, kernels.KL, kernels.KU)


def constant_flow_relax(q11, q12, grid: Grid, params: ModelParams, config: SolveConfig = SolveConfig()) -> SolveReport:
    """Semi-implicit gradient flow for the frozen-velocity system.

    Each step solves two tridiagonal systems; the energy is recorded at
    every iterate and is nonincreasing for the stable step sizes used.
    """
    if params.regime != CONSTANT_FLOW:
        raise ParameterError("constant_flow_relax needs the constant_flow regime")
    st = apply_boundary_conditions(ChannelState(grid, q11, q12, np.zeros(grid.n_nodes)), params)
    a, b, steps, res, energy, ok = kernels.relax_cf(
        st.q11, st.q12, grid.h, params.eps, config.dt, config.flow_tol, config.max_steps
    )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DivergenceError(f"gradient flow blew up after {steps} steps")
    final = ChannelState(grid, a, b, np.zeros(grid.n_nodes))
    return SolveReport(final, bool(ok), int(steps), np.asarray(res), np.asarray(energy), method="gradient_flow")


def gradient_flow(state0: ChannelState, params: ModelParams, config: SolveConfig = SolveConfig()) -> SolveReport:
    """Relax to a steady state by linearly implicit pseudo-time stepping.

    Derivative terms are treated implicitly with coefficients frozen at the
    current iterate, so fixed points of the iteration are exact discrete
    steady states.  Stops once the sup-norm residual drops below
    ``config.flow_tol``.
    """
    if params.regime == CONSTANT_FLOW:
        return constant_flow_relax(state0.q11, state0.q12, state0.grid, params, config)
    g = state0.grid
    st = apply_boundary_conditions(state0, params)
    x = st.to_vector()
    n = g.n_nodes
    dt = config.dt
    dtu = dt / params.l1
    gc2 = params.active_flux
    res = []
    converged = False
    steps = 0
    while True:
        r = _residual_vector(st, params)
        rn = _sup(r)
        if not math.isfinite(rn):
            raise DivergenceError(f"gradient flow blew up after {steps} steps")
        res.append(rn)
        if rn < config.flow_tol:
            converged = True
            break
        if steps >= config.max_steps:
            break
        ab = kernels.frozen_band(st.q11, st.q12, st.u, g.h, params.eps, params.l2, gc2, dt, dtu, True)
        rhs = x.copy()
        inner = slice(3, 3 * (n - 1))
        rhs[inner][0::3] += dt * params.eps * x[inner][0::3]
        rhs[inner][1::3] += dt * params.eps * x[inner][1::3]
        rhs[inner][2::3] -= dtu * params.p_x
        walls = (x[:3].copy(), x[-3:].copy())
        x = BandedMatrix(ab, kernels.KL, kernels.KU).solve(rhs)
        x[:3], x[-3:] = walls
        st = ChannelState.from_vector(g, x)
        steps += 1
    # with flow coupling the Q energy is not a Lyapunov function, so no trace
    return SolveReport(st, converged, steps, np.array(res), method="gradient_flow")


def newton_solve(state0: ChannelState, params: ModelParams, config: SolveConfig = SolveConfig()) -> SolveReport:
    """Damped Newton iteration on the steady residual.

    The step is halved until the residual 2-norm decreases, at most
    ``config.damping_max_halvings`` times.  Converged when the sup-norm
    residual is below ``config.newton_tol``, or when a full Newton step is
    below ``config.step_tol`` (on fine grids the residual floor set by
    rounding in the h**-2 stencils can sit above ``newton_tol``).
    """
    g = state0.grid
    st = apply_boundary_conditions(state0, params)
    x = st.to_vector()
    r = _residual_vector(st, params)
    res = [_sup(r)]
    it = 0
    small_step = False
    while res[-1] >= config.newton_tol and it < config.max_iter:
        jac = assemble_jacobian(st, params)
        dx = jac.solve(-r)
        # identity wall rows with zero residual; drop roundoff so the data stay exact
        dx[:3] = 0.0
        dx[-3:] = 0.0
        if _sup(dx) < config.step_tol:
            x = x + dx
            st = ChannelState.from_vector(g, x)
            r = _residual_vector(st, params)
            res.append(_sup(r))
            it += 1
            small_step = True
            break
        norm0 = float(np.linalg.norm(r))
        lam = 1.0
        for _ in range(config.damping_max_halvings + 1):
            trial = ChannelState.from_vector(g, x + lam * dx)
            rt = _residual_vector(trial, params)
            if np.all(np.isfinite(rt)) and np.linalg.norm(rt) < norm0:
                break
            lam *= 0.5
        else:
            raise StagnationError(f"line search failed at iteration {it} (residual {res[-1]:.3e})")
        x = x + lam * dx
        st, r = trial, rt
        res.append(_sup(r))
        it += 1
        log.debug("newton %d: |R| = %.3e, step %.3g", it, res[-1], lam)
    converged = small_step or res[-1] < config.newton_tol
    return SolveReport(st, converged, it, np.array(res), method="newton")


def _interior_indices(grid: Grid, params: ModelParams) -> np.ndarray:
    comps = (0, 1, 2) if params.coupled else (0, 1)
    nodes = np.arange(1, grid.n_nodes - 1)
    return np.sort(np.concatenate([3 * nodes + c for c in comps]))


def stability(state: ChannelState, params: ModelParams, keep_eigenvalues: bool = False) -> StabilityReport:
    """Spectrum of the linearised dynamics about ``state``.

    Wall unknowns are removed (Dirichlet), as are the velocity unknowns in
    the constant-flow regime.  Velocity rows are divided by the inertia
    number so that the eigenvalues are growth rates.
    """
    jac = assemble_jacobian(state, params).to_dense()
    idx = _interior_indices(state.grid, params)
    a = jac[np.ix_(idx, idx)]
    if params.coupled:
        a[2::3] /= params.l1
    try:
        ev = eigvals(a, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    re = ev.real
    top = float(re.max())
    n_unstable = int(np.count_nonzero(re > STABILITY_TOL))
    if top > STABILITY_TOL:
        verdict = UNSTABLE
    elif top < -STABILITY_TOL:
        verdict = STABLE
    else:
        verdict = MARGINAL
    return StabilityReport(top, verdict, n_unstable, ev if keep_eigenvalues else None)


def gamma_sweep(
    state0: ChannelState,
    params: ModelParams,
    gamma_target: float,
    step: float = 0.05,
    config: SolveConfig = SolveConfig(),
) -> list[SolveReport]:
    """Continue a steady state in the activity from ``params.gamma_act`` to ``gamma_target``.

    Each point is a Newton solve seeded by the previous converged state.
    Stops early (returning the reports so far) if a point fails.
    """
    if not step > 0:
        raise ParameterError("sweep step must be positive")
    g0 = params.gamma_act
    n = max(1, math.ceil(abs(gamma_target - g0) / step - 1e-12))
    reports = []
    st = state0
    for j in range(1, n + 1):
        p = params.with_(gamma_act=g0 + (gamma_target - g0) * j / n)
        try:
            rep = newton_solve(st, p, config)
        except (StagnationError, FactorizationError) as exc:
            log.warning("gamma sweep stopped at %.4g: %s", p.gamma_act, exc)
            break
        reports.append(rep)
        if not rep.converged:
            break
        st = rep.final_state
    return reports
