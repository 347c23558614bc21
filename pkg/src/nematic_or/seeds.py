"""Initial states for the solvers, described by small picklable records."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .asymptotics import active_or_implicit_profile, active_or_profile, limit_small_eps, passive_or_profile
from .errors import ConfigError
from .grid import Grid
from .model import ChannelState, ModelParams, apply_boundary_conditions, cospi, sinpi

UNIFORM = "uniform"
LIMIT_SMALL_EPS = "limit_small_eps"
TWIST = "twist"
LINEAR = "linear"
PARABOLIC = "parabolic"
PASSIVE_OR = "passive_or"
ACTIVE_OR = "active_or"
ACTIVE_OR_IMPLICIT = "active_or_implicit"
FILE = "file"
SEED_KINDS = (UNIFORM, LIMIT_SMALL_EPS, TWIST, LINEAR, PARABOLIC, PASSIVE_OR, ACTIVE_OR, ACTIVE_OR_IMPLICIT, FILE)


@dataclass(frozen=True)
class SeedSpec:
    """How to build a starting state.

    kinds:
      uniform            q = wall value everywhere, u = 0
      limit_small_eps    harmonic Q profile
      twist              q = (cos, sin)(2 omega pi y)/2 with a Poiseuille u
      linear             q11 = cos(2 omega pi)/2, q12 = y sin(2 omega pi)/2
      parabolic          q11 = (y^2 + 1)/2, q12 as for ``linear``
      passive_or / active_or / active_or_implicit   asymptotic OR-type seeds
      file               a profile table written by the CLI
    """

    kind: str = TWIST
    k: int = 0
    s_min: float = 0.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in SEED_KINDS:
            raise ConfigError(f"unknown seed kind {self.kind!r}; expected one of {', '.join(SEED_KINDS)}")
        if self.kind == FILE and not self.path:
            raise ConfigError("a file seed needs a path")

    def to_dict(self) -> dict:
        return asdict(self)

    def __call__(self, params: ModelParams, grid: Grid) -> ChannelState:
        return build_seed(self, params, grid)


def build_seed(spec: SeedSpec, params: ModelParams, grid: Grid) -> ChannelState:
    y = grid.y
    zero = np.zeros(grid.n_nodes)
    w = params.omega
    if spec.kind == UNIFORM:
        c, s = 0.5 * cospi(2 * w), 0.5 * sinpi(2 * w)
        st = ChannelState(grid, np.full_like(y, c), np.full_like(y, s), zero)
    elif spec.kind == LIMIT_SMALL_EPS:
        q11, q12, _, _ = limit_small_eps(w, grid)
        st = ChannelState(grid, q11, q12, zero)
    elif spec.kind == TWIST:
        u = -params.p_x * (1.0 - y * y) / 2.0 if params.coupled else zero
        st = ChannelState(grid, np.cos(2 * w * math.pi * y) / 2, np.sin(2 * w * math.pi * y) / 2, u)
    elif spec.kind == LINEAR:
        st = ChannelState(grid, np.full_like(y, 0.5 * cospi(2 * w)), 0.5 * sinpi(2 * w) * y, zero)
    elif spec.kind == PARABOLIC:
        st = ChannelState(grid, (y * y + 1.0) / 2.0, 0.5 * sinpi(2 * w) * y, zero)
    elif spec.kind == PASSIVE_OR:
        st = passive_or_profile(params, grid, spec.k, spec.s_min).state(params)
    elif spec.kind == ACTIVE_OR:
        st = active_or_profile(params, grid, spec.k, spec.s_min).state(params)
    elif spec.kind == ACTIVE_OR_IMPLICIT:
        st = active_or_implicit_profile(params, grid, spec.k, spec.s_min).state(params)
    else:
        from .io import read_profile

        st = read_profile(spec.path)
        if st.grid.n_cells != grid.n_cells:
            raise ConfigError(f"seed file has {st.grid.n_cells} cells, run uses {grid.n_cells}")
    return apply_boundary_conditions(st, params)
