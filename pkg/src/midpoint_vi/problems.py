"""Built-in mechanical problems ``L(q, v) = |v|^2/2 - V(q)``."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lagrangian import LagrangianModel


@dataclass(frozen=True)
class MechanicalProblem:
    name: str
    potential: callable
    potential_grad: callable
    exact_solution: callable = None  # (t, PhasePoint) -> PhasePoint
    dim: int = 1


def make_mechanical(problem):
    """Lagrangian ``|v|^2/2 - V(q)`` with analytic gradients and ``g(p, q) = p``."""
    V, dV = problem.potential, problem.potential_grad
    return LagrangianModel(
        dim=problem.dim,
        eval_L=lambda q, v: 0.5 * float(np.dot(v, v)) - V(q),
        grad_q=lambda q, v: -np.asarray(dV(q), float),
        grad_v=lambda q, v: np.array(v, dtype=float),
        legendre_inverse=lambda p, q: np.array(p, dtype=float),
        name=problem.name,
    )


def _free_exact(t, state):
    from .hamiltonian import PhasePoint

    return PhasePoint(state.q + state.p * t, state.p)


def _harmonic_exact(t, state):
    from .hamiltonian import PhasePoint

    c, s = np.cos(t), np.sin(t)
    return PhasePoint(state.q * c + state.p * s, -state.q * s + state.p * c)


def free_particle(dim=1):
    return MechanicalProblem(
        "free_particle", lambda q: 0.0, lambda q: np.zeros_like(np.asarray(q, float)), _free_exact, dim
    )


def harmonic_oscillator(dim=1):
    return MechanicalProblem(
        "harmonic",
        lambda q: 0.5 * float(np.dot(q, q)),
        lambda q: np.array(q, dtype=float),
        _harmonic_exact,
        dim,
    )


def pendulum(dim=1):
    return MechanicalProblem(
        "pendulum",
        lambda q: -float(np.sum(np.cos(q))),
        lambda q: np.sin(np.asarray(q, float)),
        None,
        dim,
    )


def constant_potential(value, dim=1):
    return MechanicalProblem(
        "constant_potential", lambda q: float(value), lambda q: np.zeros_like(np.asarray(q, float)),
        _free_exact, dim,
    )


PROBLEMS = {
    "free_particle": free_particle,
    "harmonic": harmonic_oscillator,
    "pendulum": pendulum,
}


def get_problem(name, dim=1):
    try:
        return PROBLEMS[name](dim)
    except KeyError:
        raise DomainError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None


def potential_grad_check(problem, rng=None, n_points=20):
    """Largest relative gap between ``potential_grad`` and central differences of ``potential``."""
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(n_points):
        q = rng.normal(size=problem.dim)
        fd = np.empty(problem.dim)
        for k in range(problem.dim):
            e = np.zeros(problem.dim)
            e[k] = 1e-6
            fd[k] = (problem.potential(q + e) - problem.potential(q - e)) / 2e-6
        worst = max(worst, float(np.max(np.abs(fd - problem.potential_grad(q))) / max(1.0, np.max(np.abs(fd)))))
    return worst


def cosh_lagrangian(dim=1):
    """``L = sum cosh(v_k) - |q|^2/2``: a non-quadratic kinetic term with ``g(p, q) = arcsinh(p)``."""
    return LagrangianModel(
        dim=dim,
        eval_L=lambda q, v: float(np.sum(np.cosh(v))) - 0.5 * float(np.dot(q, q)),
        grad_q=lambda q, v: -np.array(q, dtype=float),
        grad_v=lambda q, v: np.sinh(np.asarray(v, float)),
        legendre_inverse=lambda p, q: np.arcsinh(np.asarray(p, float)),
        name="cosh",
    )
