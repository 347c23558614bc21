"""Uniform mesh on [-1, 1] with finite-difference operators and quadrature.

Fields are plain float64 arrays with one value per node; :meth:`Grid.field`
validates them.  The derivative stencils are second order everywhere,
including the one-sided closures at the walls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridSizeError

DEFAULT_N_CELLS = 256


@dataclass(frozen=True)
class Grid:
    n_cells: int = DEFAULT_N_CELLS
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n_cells)
        if n < 2:
            raise GridSizeError(f"need at least 2 cells, got {self.n_cells}")
        # integer numerators keep y_{n-i} == -y_i bit for bit
        y = (2.0 * np.arange(n + 1) - n) / n
        y.setflags(write=False)
        object.__setattr__(self, "n_cells", n)
        object.__setattr__(self, "nodes", y)

    @property
    def h(self) -> float:
        return 2.0 / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @property
    def y(self) -> np.ndarray:
        return self.nodes

    def field(self, values) -> np.ndarray:
        """Broadcast/validate ``values`` into a nodal array on this grid."""
        f = np.array(np.broadcast_to(np.asarray(values, dtype=float), (self.n_nodes,)))
        if not np.all(np.isfinite(f)):
            raise ValueError("field contains non-finite values")
        return f

    def _check(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n_nodes,):
            raise GridSizeError(f"field has shape {f.shape}, grid has {self.n_nodes} nodes")
        return f

    def d1(self, f) -> np.ndarray:
        f = self._check(f)
        h = self.h
        out = np.empty_like(f)
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
        return out

    def d2(self, f) -> np.ndarray:
        f = self._check(f)
        h2 = self.h**2
        out = np.empty_like(f)
        out[1:-1] = (f[:-2] - 2 * f[1:-1] + f[2:]) / h2
        if self.n_nodes >= 4:
            out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h2
            out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h2
        else:
            out[0] = out[-1] = out[1]
        return out

    def integrate(self, f) -> float:
        """Composite trapezoid rule over [-1, 1]."""
        f = self._check(f)
        return float(self.h * (f.sum() - 0.5 * (f[0] + f[-1])))

    def cumulative(self, f) -> np.ndarray:
        """Running trapezoid integral from y = -1."""
        f = self._check(f)
        out = np.zeros_like(f)
        out[1:] = np.cumsum(0.5 * self.h * (f[1:] + f[:-1]))
        return out

    def sample(self, f, y: float) -> float:
        """Linear interpolation of nodal values at ``y``."""
        f = self._check(f)
        if not -1.0 <= y <= 1.0:
            raise DomainError(f"y = {y} outside [-1, 1]")
        t = (y + 1.0) / self.h
        i = min(int(np.floor(t)), self.n_cells - 1)
        w = t - i
        if w == 0.0:
            return float(f[i])
        return float((1.0 - w) * f[i] + w * f[i + 1])

    @property
    def center(self) -> int | None:
        """Index of the node at y = 0, if the grid has one."""
        return self.n_cells // 2 if self.n_cells % 2 == 0 else None
