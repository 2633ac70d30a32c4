"""
Mid-point discrete Lagrangian mechanics.

The mid-point action of a trajectory ``q`` on ``T`` is the mid-point
quadrature of ``L`` evaluated at the *star points*
``(q_circ(t_{i+1/2}), D_circ+[q_circ](t_{i+1/2}))``, i.e. at
``((q_i + q_{i+1})/2, (q_{i+1} - q_i)/h)``.  Its critical points satisfy,
at every half node ``t_{j+1/2}`` with ``j = 1..N-1``,

    [dL/dq(star)]_{1/2,-} - D_{1/2,-}[dL/dv(star)] = 0,

which is the residual returned by :func:`el_residual_midpoint`.  Given
``(q_{i-1}, q_i)`` the same equation determines ``q_{i+1}`` implicitly;
:func:`step_midpoint_lagrangian` solves it.

The two-point discrete Lagrangian ``Ld(x, y) = h L((x+y)/2, (y-x)/h)`` is
provided for comparison.  Its Euler-Lagrange expression
``d_x Ld(q_i, q_{i+1}) + d_y Ld(q_{i-1}, q_i)`` equals ``+h`` times the
residual above (checked in the test suite).
"""

from dataclasses import dataclass

import numpy as np

from . import calculus as calc
from .errors import ConvergenceError, DomainError, StepFailure
from .solver import DEFAULT_CONFIG, solve_root
from .time_grid import NodeSet


def _central_gradient(func, x, other, wrt):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.shape[0]):
        step = max(1e-6, 1e-6 * abs(x[k]))
        xp, xm = x.copy(), x.copy()
        xp[k] += step
        xm[k] -= step
        if wrt == "q":
            g[k] = (func(xp, other) - func(xm, other)) / (xp[k] - xm[k])
        else:
            g[k] = (func(other, xp) - func(other, xm)) / (xp[k] - xm[k])
    return g


@dataclass(frozen=True)
class LagrangianModel:
    """A time-independent Lagrangian ``L(q, v)`` on ``R^d x R^d``.

    ``grad_q`` and ``grad_v`` default to central differences of ``eval_L``.
    ``legendre_inverse(p, q)``, when given, must return the ``v`` solving
    ``grad_v(q, v) = p``.
    """

    dim: int
    eval_L: callable
    grad_q: callable = None
    grad_v: callable = None
    legendre_inverse: callable = None
    name: str = "lagrangian"

    def __post_init__(self):
        if self.grad_q is None:
            object.__setattr__(
                self, "grad_q", lambda q, v: _central_gradient(self.eval_L, q, np.asarray(v, float), "q")
            )
        if self.grad_v is None:
            object.__setattr__(
                self, "grad_v", lambda q, v: _central_gradient(self.eval_L, v, np.asarray(q, float), "v")
            )

    def self_check(self, rng=None, n_points=20, scale=1.0):
        """Largest relative mismatch of the gradients (and Legendre inverse).

        Returns a dict with ``grad_q``, ``grad_v`` (vs central differences of
        ``eval_L``) and ``legendre`` (``|grad_v(q, g(p, q)) - p|``, or
        ``None`` without an analytic inverse).
        """
        rng = np.random.default_rng(0) if rng is None else rng
        worst = {"grad_q": 0.0, "grad_v": 0.0, "legendre": None}
        for _ in range(n_points):
            q = rng.normal(scale=scale, size=self.dim)
            v = rng.normal(scale=scale, size=self.dim)
            fq = _central_gradient(self.eval_L, q, v, "q")
            fv = _central_gradient(self.eval_L, v, q, "v")
            for key, got, ref in (("grad_q", self.grad_q(q, v), fq), ("grad_v", self.grad_v(q, v), fv)):
                err = np.max(np.abs(got - ref)) / max(1.0, np.max(np.abs(ref)))
                worst[key] = max(worst[key], float(err))
            if self.legendre_inverse is not None:
                p = rng.normal(scale=scale, size=self.dim)
                err = float(np.max(np.abs(self.grad_v(q, self.legendre_inverse(p, q)) - p)))
                worst["legendre"] = max(worst["legendre"] or 0.0, err)
        return worst


@dataclass(frozen=True)
class StarPoint:
    """Position and discrete velocity at one half node."""

    q_half: np.ndarray
    v_half: np.ndarray


def reconstruct_star(q_i, q_ip1, h):
    """Apply the block map ``[[1/2, 1/2], [-1/h, 1/h]]`` to ``(q_i, q_{i+1})``."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    q_i, q_ip1 = np.atleast_1d(np.asarray(q_i, float)), np.atleast_1d(np.asarray(q_ip1, float))
    return StarPoint((q_i + q_ip1) / 2, (q_ip1 - q_i) / h)


def reconstruct_q(star, h):
    """Inverse of :func:`reconstruct_star`: ``(q_i, q_{i+1})`` from a star point."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    half = star.v_half * (h / 2)
    return star.q_half - half, star.q_half + half


def _check_dim(L, q):
    if q.dim != L.dim:
        raise DomainError(f"trajectory has dimension {q.dim}, Lagrangian expects {L.dim}")
    if q.node_set.kind != "T":
        raise DomainError(f"trajectory must live on T, got {q.node_set.kind}")


def star_points(q):
    """Star points of a trajectory as two ``T_half`` grid functions ``(q_circ, v_circ)``."""
    q_circ = calc.extend(q)
    v_circ = calc.delta_plus(q_circ)
    half = NodeSet("T_half", q.grid)
    return (
        calc.restrict(q_circ, "T_half"),
        calc.GridFunction(half, v_circ.values[1::2]),
    )


def _along(func, qh, vh):
    vals = np.array([func(a, b) for a, b in zip(qh.values, vh.values)], dtype=float)
    return calc.GridFunction(qh.node_set, vals.reshape(len(qh), -1))


def action_midpoint(L, q):
    """Mid-point action ``sum_i L((q_i + q_{i+1})/2, (q_{i+1} - q_i)/h) h``."""
    _check_dim(L, q)
    qh, vh = star_points(q)
    return float(calc.integral_midpoint(_along(L.eval_L, qh, vh), 0, q.grid.n_intervals)[0])


def action_order1(L, q):
    """Right-rectangle action ``sum_i L(q_i, (q_{i+1} - q_i)/h) h``."""
    _check_dim(L, q)
    dq = calc.delta_plus(q)
    qp = calc.GridFunction(dq.node_set, q.values[:-1])
    return float(calc.integral_lambda(_along(L.eval_L, qp, dq), 0.0, 0, q.grid.n_intervals)[0])


def el_residual_midpoint(L, q):
    """Mid-point Euler-Lagrange residual on ``T_half_minus`` (labels ``1..N-1``).

    Label ``j`` holds ``(dL/dq(s_j) + dL/dq(s_{j-1}))/2 - (dL/dv(s_j) - dL/dv(s_{j-1}))/h``
    with ``s_j`` the star point at ``t_{j+1/2}``.
    """
    _check_dim(L, q)
    if q.grid.n_intervals < 2:
        raise DomainError("the Euler-Lagrange residual needs N >= 2")
    qh, vh = star_points(q)
    gq = calc.avg_half_minus(_along(L.grad_q, qh, vh))
    gv = calc.delta_minus(_along(L.grad_v, qh, vh))
    return calc.GridFunction(gq.node_set, gq.values - gv.values)


def frechet_midpoint(L, q, v):
    """Directional derivative of :func:`action_midpoint` at ``q`` along ``v``.

    ``v`` must vanish at both end points.  Computed as
    ``int_{t_1}^{t_N} r(sigma_circ(t)) . v(t) dt`` with ``r`` the residual of
    :func:`el_residual_midpoint`.
    """
    _check_dim(L, q)
    if v.node_set != q.node_set or v.dim != q.dim:
        raise DomainError("variation must live on the same grid and dimension as q")
    if np.any(v.values[0] != 0) or np.any(v.values[-1] != 0):
        raise DomainError("variation must vanish at t_0 and t_N")
    r = calc.at_sigma_circ(el_residual_midpoint(L, q))  # T_pm
    v_in = calc.GridFunction(r.node_set, v.values[1:-1])
    return float(calc.integral_lambda(calc.dot(r, v_in), 0.0, 1, q.grid.n_intervals)[0])


def _bridge_residual(L, q_prev, q_curr, h):
    """``h`` times the Euler-Lagrange residual at ``q_curr``, as a function of ``q_next``.

    Scaling by ``h`` puts the equation in momentum units.  Unscaled, the
    difference of ``dL/dv`` divided by ``h`` has a rounding floor of about
    ``eps |dL/dv| / h``, which can exceed the solver tolerance for small steps.
    """
    qa, va = (q_prev + q_curr) / 2, (q_curr - q_prev) / h
    gq_a, gv_a = L.grad_q(qa, va), L.grad_v(qa, va)

    def residual(q_next):
        qb, vb = (q_curr + q_next) / 2, (q_next - q_curr) / h
        return h / 2 * (L.grad_q(qb, vb) + gq_a) - (L.grad_v(qb, vb) - gv_a)

    return residual


def step_midpoint_lagrangian(L, q_prev, q_curr, h, cfg=DEFAULT_CONFIG, stats=None):
    """Solve the mid-point Euler-Lagrange equation for ``q_{i+1}``.

    The Newton predictor is the free-particle extrapolation ``2 q_i - q_{i-1}``.
    """
    q_prev = np.atleast_1d(np.asarray(q_prev, float))
    q_curr = np.atleast_1d(np.asarray(q_curr, float))
    return solve_root(_bridge_residual(L, q_prev, q_curr, h), 2 * q_curr - q_prev, cfg, stats)


def integrate_lagrangian(L, q0, q1, grid, cfg=DEFAULT_CONFIG):
    """Run the two-step mid-point recursion from ``(q_0, q_1)`` over ``grid``.

    Returns a :class:`~midpoint_vi.record.TrajectoryRecord` whose momentum
    column is the discrete momentum of the computed trajectory.
    """
    from .hamiltonian import discrete_momentum, energy_along
    from .record import TrajectoryRecord

    n, h = grid.n_intervals, grid.step
    if n < 2:
        raise DomainError("integrate_lagrangian needs N >= 2")
    q = np.empty((n + 1, L.dim))
    q[0], q[1] = np.atleast_1d(q0), np.atleast_1d(q1)
    iters = 0
    for i in range(1, n):
        stats = {}
        try:
            q[i + 1] = step_midpoint_lagrangian(L, q[i - 1], q[i], h, cfg, stats)
        except ConvergenceError as exc:
            partial = TrajectoryRecord(grid.nodes()[: i + 1], q[: i + 1].copy(), None, None,
                                       {"scheme": "midpoint_lagrangian", "h": h, "N": n})
            raise StepFailure(f"step {i + 1} failed: {exc}", i + 1, exc, partial) from exc
        iters += stats["iterations"]
    traj = calc.GridFunction(NodeSet("T", grid), q)
    p = discrete_momentum(L, traj).values
    return TrajectoryRecord(
        grid.nodes(), q, p, energy_along(L, p, q, cfg),
        {"scheme": "midpoint_lagrangian", "h": h, "N": n, "newton_iterations": iters},
    )


def el_residual_order1(L, q):
    """Order-one residual ``dL/dq(q, D+q) - D-[dL/dv(q, D+q)]`` on ``T_pm``."""
    _check_dim(L, q)
    if q.grid.n_intervals < 2:
        raise DomainError("the order-one residual needs N >= 2")
    dq = calc.delta_plus(q)
    qp = calc.GridFunction(dq.node_set, q.values[:-1])
    gq = _along(L.grad_q, qp, dq)  # T_plus
    gv = _along(L.grad_v, qp, dq)
    dgv = calc.delta_minus(gv)  # T_pm
    return calc.GridFunction(dgv.node_set, gq.values[1:] - dgv.values)


def two_point_lagrangian(L, x, y, h):
    """Two-point discrete Lagrangian ``h L((x + y)/2, (y - x)/h)``."""
    if not h > 0:
        raise DomainError(f"step must be positive, got {h}")
    s = reconstruct_star(x, y, h)
    return h * L.eval_L(s.q_half, s.v_half)


def two_point_partials(L, x, y, h):
    """``(d Ld/dx, d Ld/dy)`` at ``(x, y)`` from the chain rule."""
    s = reconstruct_star(x, y, h)
    gq, gv = L.grad_q(s.q_half, s.v_half), L.grad_v(s.q_half, s.v_half)
    return h * (gq / 2 - gv / h), h * (gq / 2 + gv / h)


def two_point_el_residual(L, q_prev, q_curr, q_next, h):
    """``d_x Ld(q_i, q_{i+1}) + d_y Ld(q_{i-1}, q_i)``."""
    dx, _ = two_point_partials(L, q_curr, q_next, h)
    _, dy = two_point_partials(L, q_prev, q_curr, h)
    return dx + dy


def mechanical_el_residual(potential_grad, q_prev, q_curr, q_next, h):
    """Force minus acceleration for ``L = |v|^2/2 - V(q)``::

        -(V'((q_{i+1}+q_i)/2) + V'((q_i+q_{i-1})/2))/2 - (q_{i+1} - 2 q_i + q_{i-1})/h^2
    """
    q_prev, q_curr, q_next = (np.atleast_1d(np.asarray(a, float)) for a in (q_prev, q_curr, q_next))
    force = -(potential_grad((q_next + q_curr) / 2) + potential_grad((q_curr + q_prev) / 2)) / 2
    return force - (q_next - 2 * q_curr + q_prev) / h**2
