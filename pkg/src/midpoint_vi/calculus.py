"""
Discrete derivatives, averages and anti-derivatives on the mid-point time scales.

All operators act on :class:`GridFunction` objects and return new ones on the
node set where the result is defined.  Labels follow :mod:`.time_grid`, so
for instance ``delta_plus`` of a function on ``T`` lives on ``T_plus`` and
``avg_half_minus`` of a function on ``T_half`` lives on ``T_half_minus``.

Products inside integrals are taken componentwise, so an integral of a
``d``-vector valued integrand is again a ``d``-vector.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .time_grid import NodeSet, _KINDS


def _kind_for(base, start, stop, grid):
    size = NodeSet(base, grid).base_size() if base != "T_lambda" else grid.n_intervals
    for kind, (b, lo, hi) in _KINDS.items():
        if b == base and lo == start and size - hi == stop:
            return kind
    raise DomainError(f"labels {start}..{stop - 1} of {base} do not form a named node set")


@dataclass(frozen=True, eq=False)
class GridFunction:
    """A ``d``-vector valued function sampled on every node of ``node_set``.

    ``values`` has shape ``(len(node_set), d)``; row ``k`` is the value at
    label ``node_set.start + k``.
    """

    node_set: NodeSet
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise DomainError(f"values must be (n,) or (n, d), got shape {v.shape}")
        if v.shape[0] != len(self.node_set):
            raise DomainError(
                f"{self.node_set.kind} has {len(self.node_set)} nodes but {v.shape[0]} values were given"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def sample(cls, node_set, func):
        """Evaluate ``func(t)`` at every node of ``node_set``."""
        return cls(node_set, np.array([np.atleast_1d(func(t)) for t in node_set.times()], dtype=float))

    @property
    def dim(self):
        return self.values.shape[1]

    @property
    def grid(self):
        return self.node_set.grid

    def at(self, label):
        """Value at a label of the node set."""
        if not self.node_set.contains(label):
            raise DomainError(f"label {label} not in {self.node_set.kind}")
        return self.values[label - self.node_set.start]

    def __len__(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"GridFunction({self.node_set.kind}, N={self.grid.n_intervals}, d={self.dim})"


def _require_base(f, *bases):
    if f.node_set.base not in bases:
        raise DomainError(f"expected a function on {' or '.join(bases)}, got {f.node_set.kind}")


def _same_nodes(f, g):
    if f.node_set != g.node_set:
        raise DomainError(f"node sets differ: {f.node_set.kind} vs {g.node_set.kind}")
    if f.dim != g.dim:
        raise DomainError(f"dimensions differ: {f.dim} vs {g.dim}")


def extend(f):
    """Mid-point extension of ``f`` from ``T`` to ``T_circ``.

    Node values are kept; each half node gets the mean of its two neighbours.
    """
    if f.node_set.kind != "T":
        raise DomainError(f"extend needs a function on T, got {f.node_set.kind}")
    v = f.values
    out = np.empty((2 * len(v) - 1, v.shape[1]))
    out[0::2] = v
    out[1::2] = (v[:-1] + v[1:]) / 2
    return GridFunction(NodeSet("T_circ", f.grid), out)


def restrict(f, kind):
    """Restrict a function on ``T_circ`` to its ``T`` or ``T_half`` nodes."""
    if f.node_set.kind != "T_circ":
        raise DomainError(f"restrict needs a function on T_circ, got {f.node_set.kind}")
    if kind == "T":
        return GridFunction(NodeSet("T", f.grid), f.values[0::2])
    if kind == "T_half":
        return GridFunction(NodeSet("T_half", f.grid), f.values[1::2])
    raise DomainError(f"cannot restrict T_circ to {kind}")


def delta_plus(f):
    """Forward difference quotient ``(f(sigma(t)) - f(t)) / (sigma(t) - t)``."""
    _require_base(f, "T", "T_half", "T_circ")
    if len(f) < 2:
        raise DomainError(f"delta_plus needs at least two nodes, {f.node_set.kind} has {len(f)}")
    ns = f.node_set
    kind = _kind_for(ns.base, ns.start, ns.stop - 1, ns.grid)
    return GridFunction(NodeSet(kind, ns.grid), np.diff(f.values, axis=0) / ns.spacing)


def delta_minus(f):
    """Backward difference quotient ``(f(t) - f(rho(t))) / (t - rho(t))``."""
    _require_base(f, "T", "T_half", "T_circ")
    if len(f) < 2:
        raise DomainError(f"delta_minus needs at least two nodes, {f.node_set.kind} has {len(f)}")
    ns = f.node_set
    kind = _kind_for(ns.base, ns.start + 1, ns.stop, ns.grid)
    return GridFunction(NodeSet(kind, ns.grid), np.diff(f.values, axis=0) / ns.spacing)


def avg_half_minus(f):
    """``[f]_{1/2,-}(t) = (f(t) + f(rho_half(t))) / 2`` on ``T_half_minus``."""
    _require_base(f, "T_half")
    if len(f) < 2:
        raise DomainError("avg_half_minus needs at least two half nodes (N >= 2)")
    ns = f.node_set
    kind = _kind_for("T_half", ns.start + 1, ns.stop, ns.grid)
    return GridFunction(NodeSet(kind, ns.grid), (f.values[1:] + f.values[:-1]) / 2)


def avg_circ(f):
    """``[f]_circ(t_i) = (f(t_{i+1/2}) + f(t_{i-1/2})) / 2`` on ``T_pm``.

    Accepts a function on ``T_circ`` (only its half-node values enter) or
    directly on ``T_half``.
    """
    if f.node_set.kind == "T_circ":
        f = restrict(f, "T_half")
    if f.node_set.kind != "T_half":
        raise DomainError(f"avg_circ needs a function on T_circ or T_half, got {f.node_set.kind}")
    if len(f) < 2:
        raise DomainError("avg_circ needs N >= 2")
    return GridFunction(NodeSet("T_pm", f.grid), (f.values[1:] + f.values[:-1]) / 2)


def at_sigma_circ(f):
    """Read a half-node function through ``sigma_circ``: ``t_i -> f(t_{i+1/2})``.

    Half label ``i`` is ``sigma_circ(t_i)``, so this only relabels onto the
    matching ``T`` node set (``T_half_minus`` becomes ``T_pm`` and so on).
    """
    _require_base(f, "T_half")
    ns = f.node_set
    kind = _kind_for("T", ns.start, ns.stop, ns.grid)
    return GridFunction(NodeSet(kind, ns.grid), f.values)


def product(f, g):
    """Componentwise product of two functions on the same nodes."""
    _same_nodes(f, g)
    return GridFunction(f.node_set, f.values * g.values)


def dot(f, g):
    """Pointwise inner product; a scalar (``d = 1``) grid function."""
    _same_nodes(f, g)
    return GridFunction(f.node_set, np.einsum("ij,ij->i", f.values, g.values))


def _lambda_samples(f, lam):
    ns = f.node_set
    if ns.base == "T_lambda":
        if not np.isclose(ns.lam, lam, rtol=0, atol=1e-15):
            raise DomainError(f"function sampled at lam={ns.lam}, integral asked for lam={lam}")
    elif ns.base == "T":
        if lam != 0:
            raise DomainError("a function on T nodes only supports the lam = 0 integral")
    elif ns.base == "T_half":
        if lam != 0.5:
            raise DomainError("a function on half nodes only supports the lam = 1/2 integral")
    else:
        raise DomainError(f"cannot integrate a function on {ns.kind}")
    return ns.start, ns.stop


def integral_lambda(f, lam, i, j):
    """λ-anti-derivative between the grid nodes ``t_i`` and ``t_j``.

    For ``j > i`` this is ``sum_{k=i}^{j-1} f(t_{k,lam}) * h``; it is zero for
    ``j == i`` and changes sign when the bounds are swapped.  Every λ-node
    ``k`` in ``[min(i, j), max(i, j))`` must carry a sample.
    """
    n = f.grid.n_intervals
    for idx in (i, j):
        if not 0 <= idx <= n:
            raise DomainError(f"integration bound {idx} outside 0..{n}")
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lam must lie in [0, 1), got {lam}")
    lo, hi = min(i, j), max(i, j)
    start, stop = _lambda_samples(f, lam)
    if lo == hi:
        return np.zeros(f.dim)
    if lo < start or hi > stop:
        raise DomainError(
            f"integrand on {f.node_set.kind} has no samples for k in {lo}..{hi - 1} "
            f"(available {start}..{stop - 1})"
        )
    total = f.values[lo - start:hi - start].sum(axis=0) * f.grid.step
    return total if j > i else -total


def integral_midpoint(f, i, j):
    """Mid-point quadrature: the λ = 1/2 integral of a half-node function."""
    return integral_lambda(f, 0.5, i, j)


def running_integral(f, lam=0.0):
    """``F(t_j) = integral from a to t_j`` for every ``t_j`` in ``T``."""
    start, stop = _lambda_samples(f, lam)
    if start != 0 or stop < f.grid.n_intervals:
        raise DomainError("running_integral needs samples on every interval")
    csum = np.vstack([np.zeros((1, f.dim)), np.cumsum(f.values[: f.grid.n_intervals], axis=0)])
    return GridFunction(NodeSet("T", f.grid), csum * f.grid.step)


def relative_gap(lhs, rhs, scale):
    """``max|lhs - rhs| / scale`` with the scale floored at 1e-300."""
    return float(np.max(np.abs(np.asarray(lhs) - np.asarray(rhs))) / max(float(scale), 1e-300))


def integration_by_parts_sides(f, v):
    """Both sides of the half-node integration by parts formula.

    ``f`` lives on ``T_half``, ``v`` on ``T``.  Returns ``(lhs, rhs, scale)``
    with::

        lhs = int_a^b f * D_circ+[v_circ]  dlambda=1/2
        rhs = -int_{t_1}^{t_N} D_half-[f](sigma_circ(t)) * v dt
              + f(t_{N-1/2}) v(t_N) - f(t_{1/2}) v(t_0)

    The left-difference of ``f`` is undefined at ``t_{1/2}``, so the interior
    sum starts at ``t_1``.  ``scale`` is the largest absolute term appearing
    on either side.
    """
    if f.node_set.kind != "T_half" or v.node_set.kind != "T":
        raise DomainError("need f on T_half and v on T")
    grid = f.grid
    n = grid.n_intervals
    if n < 2:
        raise DomainError("integration by parts needs N >= 2")
    vcirc = extend(v)
    dv_circ = delta_plus(vcirc)  # on T_circ_plus, labels 0..2N-1
    dv_half = GridFunction(NodeSet("T_half", grid), dv_circ.values[1::2])
    lhs = integral_midpoint(product(f, dv_half), 0, n)

    df = at_sigma_circ(delta_minus(f))  # T_pm
    interior = product(df, GridFunction(NodeSet("T_pm", grid), v.values[1:-1]))
    boundary = f.at(n - 1) * v.at(n) - f.at(0) * v.at(0)
    rhs = -integral_lambda(interior, 0.0, 1, n) + boundary

    h = grid.step
    scale = max(
        np.max(np.abs(f.values * dv_half.values)) * h * n,
        np.max(np.abs(interior.values)) * h * n,
        np.max(np.abs(boundary)),
        np.max(np.abs(f.at(n - 1) * v.at(n))),
        np.max(np.abs(f.at(0) * v.at(0))),
    )
    return lhs, rhs, scale


def averaging_sides(f, v, boundary_coefficient=None):
    """Both sides of the half-node-to-node averaging identity.

    ``lhs = int f * v_circ dlambda=1/2`` and
    ``rhs = int_{t_1}^{t_N} [f]_circ * v dt + c * (f(t_{N-1/2}) v(t_N) + f(t_{1/2}) v(t_0))``
    where ``c`` defaults to ``h/2``, the value produced by expanding the sum
    term by term.  Returns ``(lhs, rhs, scale)``.
    """
    if f.node_set.kind != "T_half" or v.node_set.kind != "T":
        raise DomainError("need f on T_half and v on T")
    grid = f.grid
    n, h = grid.n_intervals, grid.step
    c = h / 2 if boundary_coefficient is None else boundary_coefficient
    v_half = restrict(extend(v), "T_half")
    lhs = integral_midpoint(product(f, v_half), 0, n)
    avg = avg_circ(f)
    interior = product(avg, GridFunction(NodeSet("T_pm", grid), v.values[1:-1]))
    edge = f.at(n - 1) * v.at(n) + f.at(0) * v.at(0)
    rhs = integral_lambda(interior, 0.0, 1, n) + c * edge
    scale = max(
        np.max(np.abs(f.values * v_half.values)) * h * n,
        np.max(np.abs(interior.values)) * h * n,
        np.max(np.abs(edge)) * h,
        1e-300,
    )
    return lhs, rhs, scale


def averaging_boundary_probe(f, v):
    """Measure which boundary coefficient, ``h`` or ``h/2``, closes the identity.

    ``v`` should not vanish at both ends, otherwise the two candidates are
    indistinguishable.  Returns a dict with the relative gap for each
    candidate, the coefficient fitted by least squares (in units of ``h``)
    and the name of the candidate that closes the identity.
    """
    h = f.grid.step
    n = f.grid.n_intervals
    gaps = {}
    for name, c in (("h", h), ("h/2", h / 2)):
        lhs, rhs, scale = averaging_sides(f, v, c)
        gaps[name] = relative_gap(lhs, rhs, scale)
    lhs, rhs0, _ = averaging_sides(f, v, 0.0)
    edge = f.at(n - 1) * v.at(n) + f.at(0) * v.at(0)
    denom = float(np.dot(edge, edge))
    fitted = float(np.dot(edge, lhs - rhs0) / denom / h) if denom > 0 else float("nan")
    best = min(gaps, key=gaps.get)
    return {"gaps": gaps, "fitted_coefficient_over_h": fitted, "closes": best}


def dubois_raymond_witness(g):
    """Find the canonical variation that detects a non-vanishing interior value.

    ``g`` lives on ``T``.  For each interior node ``t_k`` and component ``c``
    the variation ``v = e_c * delta_k`` belongs to ``C_0``, and
    ``int g * v dt = h * g_c(t_k)``.  Returns ``(k, c, value)`` for the
    variation with the largest absolute integral, or ``None`` if every such
    integral is exactly zero (then ``g`` vanishes on ``T_pm``).
    """
    if g.node_set.kind != "T":
        raise DomainError("dubois_raymond_witness needs a function on T")
    n = g.grid.n_intervals
    best = None
    for k in range(1, n):
        for c in range(g.dim):
            v = np.zeros_like(g.values)
            v[k, c] = 1.0
            val = float(integral_lambda(dot(g, GridFunction(g.node_set, v)), 0.0, 0, n)[0])
            if val != 0.0 and (best is None or abs(val) > abs(best[2])):
                best = (k, c, val)
    return best
