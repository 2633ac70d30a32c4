"""
Discrete momentum, the mid-point Hamiltonian system and its action functional.

Momentum is stored on all of ``T`` (``N + 1`` values).  For a trajectory
``q`` with star points ``s_j`` at ``t_{j+1/2}``::

    p(t_0) = dL/dv(s_0) - (h/2) dL/dq(s_0)
    p(t_i) = dL/dv(s_{i-1}) + (h/2) dL/dq(s_{i-1})      i = 1..N

On solutions of the mid-point Euler-Lagrange equation the half-node average
of ``p`` then equals ``dL/dv`` at every star point.

One step of the Hamiltonian scheme maps ``(q_i, p_i)`` to ``(q_{i+1}, p_{i+1})``
by solving jointly::

    p_{i+1} = p_i + h dL/dq((q_i + q_{i+1})/2, (q_{i+1} - q_i)/h)
    q_{i+1} = q_i + h g((p_i + p_{i+1})/2, (q_i + q_{i+1})/2)

where ``g`` inverts ``v -> dL/dv(q, v)``.
"""

from dataclasses import dataclass

import numpy as np

from . import calculus as calc
from .errors import ConvergenceError, DomainError, StepFailure
from .lagrangian import LagrangianModel, star_points
from .record import TrajectoryRecord
from .solver import DEFAULT_CONFIG, solve_root


@dataclass(frozen=True)
class HamiltonianModel:
    dim: int
    eval_H: callable
    grad_p: callable
    grad_q: callable


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, float))
        p = np.atleast_1d(np.asarray(self.p, float))
        if q.shape != p.shape:
            raise DomainError(f"q and p shapes differ: {q.shape} vs {p.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise DomainError("phase point components must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)


def legendre_inverse(L, p, q, cfg=DEFAULT_CONFIG):
    """Velocity ``v`` with ``dL/dv(q, v) = p``.

    Uses the model's analytic inverse when present, otherwise Newton started
    from ``v = p``.  A :class:`ConvergenceError` usually means ``L`` is not
    admissible near ``(p, q)``.
    """
    p = np.atleast_1d(np.asarray(p, float))
    q = np.atleast_1d(np.asarray(q, float))
    if L.legendre_inverse is not None:
        return np.atleast_1d(np.asarray(L.legendre_inverse(p, q), float))
    return solve_root(lambda v: L.grad_v(q, v) - p, p, cfg)


def build_hamiltonian(L, cfg=DEFAULT_CONFIG):
    """``H(p, q) = p . g(p, q) - L(q, g(p, q))`` with its exact gradients.

    ``dH/dp = g`` and ``dH/dq = -dL/dq(q, g)``; the terms involving the
    derivatives of ``g`` cancel because ``dL/dv(q, g) = p``.
    """

    def eval_H(p, q):
        v = legendre_inverse(L, p, q, cfg)
        return float(np.dot(np.atleast_1d(p), v) - L.eval_L(np.atleast_1d(q), v))

    def grad_p(p, q):
        return legendre_inverse(L, p, q, cfg)

    def grad_q(p, q):
        q = np.atleast_1d(np.asarray(q, float))
        return -np.asarray(L.grad_q(q, legendre_inverse(L, p, q, cfg)), float)

    return HamiltonianModel(L.dim, eval_H, grad_p, grad_q)


def energy_along(L, p, q, cfg=DEFAULT_CONFIG):
    """``H(p_i, q_i)`` at every node; NaN where the Legendre map cannot be inverted."""
    H = build_hamiltonian(L, cfg)
    out = np.empty(len(q))
    for i in range(len(q)):
        try:
            out[i] = H.eval_H(p[i], q[i])
        except ConvergenceError:
            out[i] = np.nan
    return out


def _star_gradients(L, q):
    qh, vh = star_points(q)
    gq = np.array([L.grad_q(a, b) for a, b in zip(qh.values, vh.values)]).reshape(len(qh), -1)
    gv = np.array([L.grad_v(a, b) for a, b in zip(qh.values, vh.values)]).reshape(len(qh), -1)
    return gq, gv


def discrete_momentum(L, q):
    """Discrete momentum of ``q`` on ``T`` (see the module docstring)."""
    if q.node_set.kind != "T":
        raise DomainError("discrete_momentum needs a trajectory on T")
    h = q.grid.step
    gq, gv = _star_gradients(L, q)
    p = np.empty((q.grid.n_intervals + 1, q.dim))
    p[0] = gv[0] - h / 2 * gq[0]
    p[1:] = gv + h / 2 * gq
    return calc.GridFunction(q.node_set, p)


def momentum_constraint_residual(L, q, p):
    """``(p(t_i) + p(t_{i+1}))/2 - dL/dv(s_i)`` on ``T_half``."""
    if q.node_set != p.node_set or q.node_set.kind != "T":
        raise DomainError("q and p must both live on the same T")
    _, gv = _star_gradients(L, q)
    p_half = calc.restrict(calc.extend(p), "T_half")
    return calc.GridFunction(p_half.node_set, p_half.values - gv)


def _legendre_map(L, cfg):
    if L.legendre_inverse is not None:
        return L.legendre_inverse
    return lambda p, q: legendre_inverse(L, p, q, cfg)


def _midpoint_step(L, g, q0, p0, h, cfg, stats=None):
    d = q0.shape[0]

    def residual(z):
        q1, p1 = z[:d], z[d:]
        qm, vm = (q0 + q1) / 2, (q1 - q0) / h
        out = np.empty(2 * d)
        out[:d] = q1 - q0 - h * g((p0 + p1) / 2, qm)
        out[d:] = p1 - p0 - h * L.grad_q(qm, vm)
        return out

    guess = np.concatenate([q0 + h * g(p0, q0), p0])
    z = solve_root(residual, guess, cfg, stats)
    return z[:d], z[d:]


def step_midpoint_hamiltonian(L, state, h, cfg=DEFAULT_CONFIG, stats=None):
    """Advance ``(q_i, p_i)`` by one mid-point Hamiltonian step of size ``h``."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    return PhasePoint(*_midpoint_step(L, _legendre_map(L, cfg), state.q, state.p, h, cfg, stats))


def _integrate_one_step_scheme(L, initial, grid, cfg, step, scheme):
    n, h = grid.n_intervals, grid.step
    q = np.empty((n + 1, L.dim))
    p = np.empty((n + 1, L.dim))
    q[0], p[0] = initial.q, initial.p
    iters = 0
    stats = {}
    for i in range(n):
        try:
            q[i + 1], p[i + 1] = step(q[i], p[i], stats)
        except ConvergenceError as exc:
            partial = TrajectoryRecord(grid.nodes()[: i + 1], q[: i + 1].copy(), p[: i + 1].copy(),
                                       energy_along(L, p[: i + 1], q[: i + 1], cfg),
                                       {"scheme": scheme, "h": h, "N": n})
            raise StepFailure(f"step {i + 1} failed: {exc}", i + 1, exc, partial) from exc
        iters += stats["iterations"]
    return TrajectoryRecord(grid.nodes(), q, p, energy_along(L, p, q, cfg),
                            {"scheme": scheme, "h": h, "N": n, "newton_iterations": iters})


def integrate_hamiltonian(L, initial, grid, cfg=DEFAULT_CONFIG):
    """Iterate :func:`step_midpoint_hamiltonian` from ``initial`` over ``grid``."""
    h, g = grid.step, _legendre_map(L, cfg)
    return _integrate_one_step_scheme(
        L, initial, grid, cfg,
        lambda q, p, stats: _midpoint_step(L, g, q, p, h, cfg, stats),
        "midpoint_hamiltonian",
    )


def _step_order1(H, q0, p0, h, cfg, stats):
    # q_{i+1} = q_i + h dH/dp(p_i, q_i), then p_{i+1} = p_i - h dH/dq(p_{i+1}, q_{i+1})
    q1 = q0 + h * H.grad_p(p0, q0)
    p1 = solve_root(lambda x: x - p0 + h * H.grad_q(x, q1), p0, cfg, stats)
    return q1, p1


def integrate_order1_hamiltonian(L, initial, grid, cfg=DEFAULT_CONFIG):
    """Order-one discrete Hamiltonian system ``D-[p] = -dH/dq``, ``D+[q] = dH/dp``.

    Both equations are imposed at every node ``t_i`` using ``(q_i, p_i)``;
    the recursion is therefore explicit in ``q`` and implicit in ``p``
    (explicit for separable ``H``).
    """
    H = build_hamiltonian(L, cfg)
    h = grid.step
    return _integrate_one_step_scheme(
        L, initial, grid, cfg, lambda q, p, stats: _step_order1(H, q, p, h, cfg, stats), "order1"
    )


def sh_residual(L, q, p, cfg=DEFAULT_CONFIG):
    """Residuals of the discrete mid-point Hamiltonian system.

    Returns a dict of grid functions:

    ``momentum``  on ``T_half_minus``:
        ``D_{1/2,-}[p_circ] - [-dH/dq(p_circ, q_circ)]_{1/2,-}``
    ``position``  on ``T_half`` (first and last entries are the boundary equations):
        ``D_circ+[q_circ] - dH/dp(p_circ, q_circ)``
    """
    if q.node_set != p.node_set or q.node_set.kind != "T":
        raise DomainError("q and p must both live on the same T")
    if q.grid.n_intervals < 2:
        raise DomainError("sh_residual needs N >= 2")
    H = build_hamiltonian(L, cfg)
    qh, vh = star_points(q)
    ph = calc.restrict(calc.extend(p), "T_half")
    hq = np.array([H.grad_q(a, b) for a, b in zip(ph.values, qh.values)]).reshape(len(qh), -1)
    hp = np.array([H.grad_p(a, b) for a, b in zip(ph.values, qh.values)]).reshape(len(qh), -1)
    minus_hq = calc.avg_half_minus(calc.GridFunction(qh.node_set, -hq))
    dp = calc.delta_minus(ph)
    return {
        "momentum": calc.GridFunction(dp.node_set, dp.values - minus_hq.values),
        "position": calc.GridFunction(qh.node_set, vh.values - hp),
    }


def _max_sh(res):
    return max(float(np.max(np.abs(r.values))) if len(r) else 0.0 for r in res.values())


def _as_hamiltonian(model, cfg):
    return build_hamiltonian(model, cfg) if isinstance(model, LagrangianModel) else model


def action_H(model, p, q, cfg=DEFAULT_CONFIG):
    """Mid-point action ``int (p_circ . D_circ+[q_circ] - H(p_circ, q_circ)) dlambda=1/2``.

    ``model`` is a :class:`LagrangianModel` (its Hamiltonian is built) or a
    :class:`HamiltonianModel`.
    """
    H = _as_hamiltonian(model, cfg)
    if q.node_set != p.node_set or q.node_set.kind != "T":
        raise DomainError("q and p must both live on the same T")
    qh, vh = star_points(q)
    ph = calc.restrict(calc.extend(p), "T_half")
    vals = np.einsum("ij,ij->i", ph.values, vh.values) - np.array(
        [H.eval_H(a, b) for a, b in zip(ph.values, qh.values)]
    )
    return float(calc.integral_midpoint(calc.GridFunction(qh.node_set, vals), 0, q.grid.n_intervals)[0])


def action_H_gradient(model, p, q, cfg=DEFAULT_CONFIG):
    """Exact partial derivatives of :func:`action_H` with respect to every ``p_k`` and ``q_k``.

    Returns ``(dA/dp, dA/dq)`` as ``(N + 1, d)`` arrays.
    """
    H = _as_hamiltonian(model, cfg)
    h = q.grid.step
    qh, vh = star_points(q)
    ph = calc.restrict(calc.extend(p), "T_half").values
    hq = np.array([H.grad_q(a, b) for a, b in zip(ph, qh.values)]).reshape(len(qh), -1)
    hp = np.array([H.grad_p(a, b) for a, b in zip(ph, qh.values)]).reshape(len(qh), -1)
    # each half node j feeds nodes j and j+1
    gp_half = h / 2 * (vh.values - hp)
    gq_left = -ph - h / 2 * hq   # d/dq_j of the half-node-j term
    gq_right = ph - h / 2 * hq   # d/dq_{j+1}
    n = q.grid.n_intervals
    dp = np.zeros((n + 1, q.dim))
    dq = np.zeros((n + 1, q.dim))
    dp[:-1] += gp_half
    dp[1:] += gp_half
    dq[:-1] += gq_left
    dq[1:] += gq_right
    return dp, dq


def criticality_check(L, q, p, cfg=DEFAULT_CONFIG, tol=1e-8, eps=1e-6):
    """Test whether ``(q, p)`` is a critical point of :func:`action_H`.

    Directional derivatives are taken by central differences (step ``eps``)
    along every canonical variation: all ``p_k`` (free, including both ends)
    and the interior ``q_k`` (``q`` variations vanish at the ends).

    Returns a dict with ``max_directional_derivative`` (finite differences),
    ``max_exact_derivative`` (from :func:`action_H_gradient`),
    ``max_sh_residual`` and ``critical`` (finite-difference maximum <= ``tol``).
    """
    H = build_hamiltonian(L, cfg)
    n, d = q.grid.n_intervals, q.dim
    worst = 0.0
    for target, last in (("p", n), ("q", n - 1)):
        first = 0 if target == "p" else 1
        for k in range(first, last + 1):
            for c in range(d):
                vals = []
                for sgn in (1, -1):
                    pv, qv = p.values.copy(), q.values.copy()
                    (pv if target == "p" else qv)[k, c] += sgn * eps
                    vals.append(action_H(H, calc.GridFunction(p.node_set, pv),
                                         calc.GridFunction(q.node_set, qv)))
                worst = max(worst, abs(vals[0] - vals[1]) / (2 * eps))
    dp, dq = action_H_gradient(H, p, q)
    exact = max(float(np.max(np.abs(dp))), float(np.max(np.abs(dq[1:-1]))) if n > 1 else 0.0)
    res = _max_sh(sh_residual(L, q, p, cfg))
    return {
        "max_directional_derivative": worst,
        "max_exact_derivative": exact,
        "max_sh_residual": res,
        "critical": worst <= tol,
    }


def hamiltonian_seeded_q1(L, q0, p0, h, cfg=DEFAULT_CONFIG):
    """``q_1`` from one Hamiltonian step, for seeding the two-step Lagrangian recursion."""
    return step_midpoint_hamiltonian(L, PhasePoint(q0, p0), h, cfg).q

