"""Mid-point variational integrators on uniform time grids."""

from .calculus import GridFunction
from .errors import ConditioningError, ConvergenceError, DomainError, StepFailure
from .hamiltonian import HamiltonianModel, PhasePoint, build_hamiltonian, integrate_hamiltonian
from .lagrangian import LagrangianModel, integrate_lagrangian
from .problems import get_problem, make_mechanical
from .record import TrajectoryRecord
from .solver import SolverConfig
from .time_grid import NodeSet, TimeGrid

__version__ = "0.1.0"

__all__ = [
    "ConditioningError", "ConvergenceError", "DomainError", "GridFunction", "HamiltonianModel",
    "LagrangianModel", "NodeSet", "PhasePoint", "SolverConfig", "StepFailure", "TimeGrid",
    "TrajectoryRecord", "build_hamiltonian", "get_problem", "integrate_hamiltonian",
    "integrate_lagrangian", "make_mechanical",
]
