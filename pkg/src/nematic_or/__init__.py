"""Order-reconstruction states of a nematic in a channel flow.

Finite-difference solvers for the reduced Beris-Edwards system (Q-tensor
components q11, q12 and a streamwise velocity u on -1 <= y <= 1), closed
form limiting profiles to seed and check them, and diagnostics for
domain walls, symmetry and stability.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .grid import Grid
from .model import (
    ACTIVE,
    CONSTANT_FLOW,
    PASSIVE,
    ChannelState,
    ModelParams,
    director_to_q,
    q_to_director,
    residual,
)
from .seeds import SeedSpec
from .solvers import SolveConfig, SolveReport, gradient_flow, newton_solve, stability

__all__ = [
    "ACTIVE",
    "BACKEND",
    "CONSTANT_FLOW",
    "ChannelState",
    "Grid",
    "ModelParams",
    "PASSIVE",
    "SeedSpec",
    "SolveConfig",
    "SolveReport",
    "director_to_q",
    "gradient_flow",
    "newton_solve",
    "q_to_director",
    "residual",
    "stability",
    "__version__",
]
