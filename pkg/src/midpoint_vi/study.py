"""Global error at a final time over a sweep of step sizes, and the observed order."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hamiltonian import (
    PhasePoint,
    hamiltonian_seeded_q1,
    integrate_hamiltonian,
    integrate_order1_hamiltonian,
)
from .lagrangian import integrate_lagrangian
from .problems import make_mechanical
from .solver import DEFAULT_CONFIG
from .time_grid import TimeGrid

SCHEMES = ("midpoint_lagrangian", "midpoint_hamiltonian", "order1")
REFERENCE_REFINEMENT = 64

# errors below this are treated as rounding noise when fitting a slope
EXACT_FLOOR = 1e-11


@dataclass
class ConvergenceTable:
    problem: str
    scheme: str
    t_final: float
    h: np.ndarray
    error: np.ndarray
    slope: float  # NaN when the scheme is exact on this problem
    reference: str

    @property
    def exact(self):
        return bool(np.all(self.error <= EXACT_FLOOR))

    def local_orders(self):
        """Pairwise orders ``log(e_k/e_{k+1}) / log(h_k/h_{k+1})``."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.error[:-1] / self.error[1:]) / np.log(self.h[:-1] / self.h[1:])

    def format(self):
        lines = [f"# problem={self.problem} scheme={self.scheme} t_final={self.t_final:g} reference={self.reference}",
                 "h,error,observed_order"]
        orders = [float("nan")] + list(self.local_orders())
        for h, e, o in zip(self.h, self.error, orders):
            lines.append(f"{h:.6g},{e:.6e},{'' if np.isnan(o) or self.exact else f'{o:.4f}'}")
        lines.append("slope=exact" if self.exact else f"slope={self.slope:.4f}")
        return "\n".join(lines)


def run_scheme(L, scheme, initial, grid, cfg=DEFAULT_CONFIG, q1=None):
    """Integrate with one of :data:`SCHEMES`.

    The two-step Lagrangian recursion needs ``q_1``; without one it is taken
    from a single Hamiltonian step so the runs are comparable.
    """
    if scheme == "midpoint_hamiltonian":
        return integrate_hamiltonian(L, initial, grid, cfg)
    if scheme == "order1":
        return integrate_order1_hamiltonian(L, initial, grid, cfg)
    if scheme == "midpoint_lagrangian":
        if q1 is None:
            q1 = hamiltonian_seeded_q1(L, initial.q, initial.p, grid.step, cfg)
        return integrate_lagrangian(L, initial.q, q1, grid, cfg)
    raise DomainError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


def _steps(t_final, h):
    n = int(round(t_final / h))
    if n < 1 or abs(n * h - t_final) > 1e-9 * t_final:
        raise DomainError(f"t_final={t_final} is not a whole number of steps h={h}")
    return n


def converge(problem, scheme, initial, h_list, t_final, cfg=DEFAULT_CONFIG):
    """Global error ``max(|q - q_ref|, |p - p_ref|)`` at ``t_final`` for each ``h``.

    The reference is the exact solution when the problem has one; otherwise
    a mid-point Hamiltonian run with step ``min(h_list) / 64``.
    """
    h = np.array(sorted(h_list, reverse=True), dtype=float)
    if len(h) < 2:
        raise DomainError("need at least two step sizes")
    L = make_mechanical(problem)
    if problem.exact_solution is not None:
        ref = problem.exact_solution(t_final, initial)
        reference = "exact"
    else:
        h_ref = h[-1] / REFERENCE_REFINEMENT
        rec = integrate_hamiltonian(L, initial, TimeGrid(0.0, t_final, _steps(t_final, h_ref)), cfg)
        ref = PhasePoint(rec.q[-1], rec.p[-1])
        reference = f"midpoint_hamiltonian h={h_ref:g}"
    errors = np.empty(len(h))
    for k, hk in enumerate(h):
        rec = run_scheme(L, scheme, initial, TimeGrid(0.0, t_final, _steps(t_final, hk)), cfg)
        errors[k] = max(np.max(np.abs(rec.q[-1] - ref.q)), np.max(np.abs(rec.p[-1] - ref.p)))
    if np.all(errors <= EXACT_FLOOR):
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(h), np.log(np.maximum(errors, 1e-300)), 1)[0])
    return ConvergenceTable(problem.name, scheme, t_final, h, errors, slope, reference)
