"""Diagnostics: OR classification, symmetry, the f(s) root oracle, error fields, sweeps."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect

from .asymptotics import AsymptoticProfile
from .errors import GridSizeError, NematicError, SingularityError
from .grid import Grid
from .model import DEFAULT_S_TOL, ChannelState, ModelParams, q_to_director
from .solvers import SolveConfig, SolveReport, StabilityReport, gradient_flow, newton_solve, stability

log = logging.getLogger(__name__)

OR_S_THRESHOLD = 0.15
OR_JUMP_THRESHOLD = math.pi / 8
WORKERS_ENV = "NEMATIC_OR_WORKERS"


@dataclass(frozen=True)
class OrClassification:
    is_or_type: bool
    s_min: float
    s_min_location: float
    theta_jump: float
    nodal_set: frozenset = field(default_factory=frozenset)


def _omega_from_walls(state: ChannelState) -> float:
    return math.atan2(state.q12[-1], state.q11[-1]) / (2.0 * math.pi)


def _params_for(state: ChannelState, params: ModelParams | None) -> ModelParams:
    return params if params is not None else ModelParams(omega=_omega_from_walls(state))


def classify_or(state: ChannelState, params: ModelParams | None = None, s_tol: float = DEFAULT_S_TOL) -> OrClassification:
    """Detect a domain wall: a deep s-minimum with a theta jump across it.

    The minimum is located by a nodal scan refined with a parabola through
    the three nearest nodes.  The jump is the change of the unwrapped angle
    across the window where s stays below half way between its minimum and
    maximum.
    """
    params = _params_for(state, params)
    view = q_to_director(state, params, s_tol)
    g = state.grid
    s = view.s
    n = s.size
    i = int(np.argmin(s))
    s_min, loc = float(s[i]), float(g.y[i])
    if 0 < i < n - 1:
        a, b, c = s[i - 1], s[i], s[i + 1]
        curv = a - 2.0 * b + c
        if curv > 0:
            d = float(np.clip(0.5 * (a - c) / curv, -0.5, 0.5))
            s_min = max(0.0, float(b - 0.25 * (a - c) * d))
            loc = float(g.y[i] + d * g.h)
    level = 0.5 * (s[i] + s.max())
    lo = i
    while lo > 0 and s[lo] < level:
        lo -= 1
    hi = i
    while hi < n - 1 and s[hi] < level:
        hi += 1
    jump = float(view.theta[hi] - view.theta[lo])
    nodal = frozenset(float(g.y[j]) for j in sorted(view.singular_nodes))
    is_or = s_min < OR_S_THRESHOLD and abs(jump) > OR_JUMP_THRESHOLD
    return OrClassification(bool(is_or), s_min, loc, jump, nodal)


def symmetry_report(state: ChannelState, params: ModelParams | None = None, s_tol: float = DEFAULT_S_TOL):
    """(sup |s(y) - s(-y)|, sup |theta(y) + theta(-y)|), singular nodes excluded.

    The director fixes theta only modulo pi, so the oddness defect is
    measured as the distance of theta(y) + theta(-y) to the nearest
    multiple of pi.
    """
    params = _params_for(state, params)
    view = q_to_director(state, params, s_tol)
    g = state.grid
    ds = 0.0
    dth = 0.0
    for j, y in enumerate(g.y):
        if j in view.singular_nodes:
            continue
        mirror = int(round((-y + 1.0) / g.h))
        if mirror in view.singular_nodes and abs(g.y[mirror] + y) < 1e-12:
            continue
        ds = max(ds, abs(view.s[j] - g.sample(view.s, -y)))
        odd = view.theta[j] + g.sample(view.theta, -y)
        dth = max(dth, abs(odd - math.pi * round(odd / math.pi)))
    return ds, dth


def f_poly(A: float, B: float, eps: float, s):
    """f(s) = s^6 - 2 s^4 + (2A/eps) s^2 - 8 B^2/eps; its roots are the extremal values of s."""
    s = np.asarray(s, dtype=float)
    s2 = s * s
    return s2 * s2 * s2 - 2.0 * s2 * s2 + (2.0 * A / eps) * s2 - 8.0 * B * B / eps


@dataclass(frozen=True)
class RootReport:
    """All sign-change roots of f on (0, 1] plus the critical points s-, s+.

    Along a solution s'^2 = eps f(s) / (2 s^2), so only a root with
    f >= 0 on [root, 1] can be the minimum of s; ``admissible`` lists it.
    """

    roots: tuple
    s_minus: float | None = None
    s_plus: float | None = None
    f_at_one: float = 0.0

    @property
    def admissible(self) -> tuple:
        if not self.roots or self.f_at_one < 0:
            return ()
        return (self.roots[-1],)

    def __len__(self):
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)


def f_critical_points(A: float, eps: float):
    """Positive critical points (s-, s+) of f, or None when A > 2 eps / 3."""
    disc = 64.0 - 96.0 * A / eps
    if disc < 0:
        return None
    r = math.sqrt(disc)
    lo = (8.0 - r) / 12.0
    return (math.sqrt(lo) if lo > 0 else 0.0, math.sqrt((8.0 + r) / 12.0))


def f_roots(A: float, B: float, eps: float, n_scan: int = 10_000, xtol: float = 1e-12) -> RootReport:
    """Roots of f on (0, 1] by a sign-change scan followed by bisection."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    grid = np.linspace(0.0, 1.0, n_scan + 1)[1:]
    grid = np.concatenate(([1.0 / (10 * n_scan)], grid))
    vals = f_poly(A, B, eps, grid)
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif fa * fb < 0:
            roots.append(float(bisect(lambda x: float(f_poly(A, B, eps, x)), a, b, xtol=xtol)))
    if vals[-1] == 0.0:
        roots.append(1.0)
    crit = f_critical_points(A, eps)
    f1 = float(vals[-1])
    if crit is None:
        return RootReport(tuple(roots), f_at_one=f1)
    return RootReport(tuple(roots), crit[0], crit[1], f1)


def b_from_omega(s, omega: float, grid: Grid | None = None) -> float:
    """B = 2 omega pi / int s^-2, the value of s^2 theta' implied by the winding number."""
    s = np.asarray(s, dtype=float)
    if grid is None:
        grid = Grid(s.size - 1)
    if np.any(s <= 0):
        raise SingularityError("b_from_omega needs s > 0 everywhere")
    return 2.0 * omega * math.pi / grid.integrate(1.0 / (s * s))


@dataclass(frozen=True)
class ErrorReport:
    """Numeric minus asymptotic, nodewise, with sup norms and their locations.

    ``ds`` compares raw s; ``ds_half`` uses the s/2 plotting convention.
    """

    grid: Grid
    dq11: np.ndarray
    dq12: np.ndarray
    ds: np.ndarray
    du: np.ndarray

    @property
    def ds_half(self) -> np.ndarray:
        return 0.5 * self.ds

    def _sup(self, f):
        j = int(np.argmax(np.abs(f)))
        return float(abs(f[j])), float(self.grid.y[j])

    @property
    def norms(self) -> dict:
        return {
            "q11": self._sup(self.dq11),
            "q12": self._sup(self.dq12),
            "s": self._sup(self.ds),
            "s_half": self._sup(self.ds_half),
            "u": self._sup(self.du),
        }

    @property
    def sup_q(self) -> float:
        return max(self.norms["q11"][0], self.norms["q12"][0])

    def outside(self, name: str, radius: float) -> float:
        """Sup of one error field over |y| >= radius."""
        f = {"q11": self.dq11, "q12": self.dq12, "s": self.ds, "s_half": self.ds_half, "u": self.du}[name]
        mask = np.abs(self.grid.y) >= radius
        return float(np.max(np.abs(f[mask]))) if mask.any() else 0.0


def compare_profiles(numeric: ChannelState, asymptotic: AsymptoticProfile) -> ErrorReport:
    if numeric.grid.n_cells != asymptotic.grid.n_cells:
        raise GridSizeError(
            f"numeric state has {numeric.grid.n_cells} cells, profile has {asymptotic.grid.n_cells}"
        )
    s_num = 2.0 * np.hypot(numeric.q11, numeric.q12)
    return ErrorReport(
        numeric.grid,
        numeric.q11 - asymptotic.q11,
        numeric.q12 - asymptotic.q12,
        s_num - asymptotic.s,
        numeric.u - asymptotic.u,
    )


@dataclass(frozen=True)
class SweepPoint:
    params: ModelParams
    report: SolveReport | None
    classification: OrClassification | None
    stability: StabilityReport | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.report is not None and self.report.converged


CONTINUATION = "continuation"
COLD = "cold"

Seed = Callable[[ModelParams, Grid], ChannelState]


def _solve_point(params, seed_state, config, method, with_stability):
    try:
        solver = newton_solve if method == "newton" else gradient_flow
        rep = solver(seed_state, params, config)
        cls = classify_or(rep.final_state, params)
        stab = stability(rep.final_state, params) if with_stability else None
        err = None if rep.converged else "not converged"
        return SweepPoint(params, rep, cls, stab, err)
    except (NematicError, ArithmeticError, ValueError, RuntimeError) as exc:
        return SweepPoint(params, None, None, None, f"{type(exc).__name__}: {exc}")


def _cold_point(args):
    params, seed, grid, config, method, with_stability = args
    try:
        st = seed(params, grid)
    except (NematicError, ValueError) as exc:
        return SweepPoint(params, None, None, None, f"{type(exc).__name__}: {exc}")
    return _solve_point(params, st, config, method, with_stability)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer %s=%r", WORKERS_ENV, raw)
        return 1


def sweep(
    schedule: Sequence[ModelParams],
    seed: Seed,
    grid: Grid,
    strategy: str = CONTINUATION,
    config: SolveConfig = SolveConfig(),
    *,
    method: str = "newton",
    with_stability: bool = True,
    workers: int | None = None,
) -> list[SweepPoint]:
    """Solve along a parameter schedule.

    ``continuation`` seeds each point from the previous converged state
    (falling back to ``seed`` after a failure); ``cold`` seeds every point
    afresh and may use a process pool.  Failures are recorded per point.
    """
    if strategy not in (CONTINUATION, COLD):
        raise ValueError(f"unknown sweep strategy {strategy!r}")
    if method not in ("newton", "relax"):
        raise ValueError(f"unknown sweep method {method!r}")
    schedule = list(schedule)
    if not schedule:
        return []
    if strategy == COLD:
        workers = default_workers() if workers is None else workers
        jobs = [(p, seed, grid, config, method, with_stability) for p in schedule]
        if workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(_cold_point, jobs))
        return [_cold_point(j) for j in jobs]
    out = []
    prev = None
    for p in schedule:
        if prev is None:
            out.append(_cold_point((p, seed, grid, config, method, with_stability)))
        else:
            out.append(_solve_point(p, prev, config, method, with_stability))
        last = out[-1]
        prev = last.report.final_state if last.ok else None
    return out
