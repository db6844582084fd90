"""chflow: energy-preserving Lagrangian discretizations of the periodic
Camassa-Holm equation and two-component system, comparison schemes, exact
references, and a convergence/benchmark harness."""

__version__ = "0.1.0"

from .grid import GridSpec, GridFunction, diff, inner
from .ode import Tolerances, Trajectory, integrate, integrate_to_event

__all__ = [
    "GridSpec",
    "GridFunction",
    "diff",
    "inner",
    "Tolerances",
    "Trajectory",
    "integrate",
    "integrate_to_event",
]
