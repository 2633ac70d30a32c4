"""
Uniform time scales on ``[a, b]`` and the shift maps between them.

A :class:`TimeGrid` with ``N`` intervals generates three *base* node sets,
each addressed by integer labels:

``T``       nodes ``t_i = a + i*h``, labels ``0..N``
``T_half``  half nodes ``t_{i+1/2} = (t_i + t_{i+1})/2``, labels ``0..N-1``
            (label ``i`` stands for ``t_{i+1/2}``)
``T_circ``  the union of both, labels ``0..2N``; even label ``2i`` is
            ``t_i``, odd label ``2i+1`` is ``t_{i+1/2}``

Every other node set is a contiguous range of labels of one base set:
``T_plus`` drops the last node, ``T_minus`` the first, ``T_pm`` both, and
likewise for ``T_half_*`` and ``T_circ_*``.  ``T_lambda`` holds the
``N`` points ``(1 - lam) t_i + lam t_{i+1}``.

Times are always recomputed from ``(a, h, label)``; nothing is accumulated.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# kind -> (base set, labels dropped at the start, labels dropped at the end)
_KINDS = {
    "T": ("T", 0, 0),
    "T_plus": ("T", 0, 1),
    "T_minus": ("T", 1, 0),
    "T_pm": ("T", 1, 1),
    "T_half": ("T_half", 0, 0),
    "T_half_plus": ("T_half", 0, 1),
    "T_half_minus": ("T_half", 1, 0),
    "T_half_pm": ("T_half", 1, 1),
    "T_circ": ("T_circ", 0, 0),
    "T_circ_plus": ("T_circ", 0, 1),
    "T_circ_minus": ("T_circ", 1, 0),
    "T_circ_pm": ("T_circ", 1, 1),
    "T_lambda": ("T_lambda", 0, 0),
}

KINDS = tuple(_KINDS)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of ``[a, b]`` into ``n_intervals`` steps of size ``h``."""

    a: float
    b: float
    n_intervals: int
    step: float = field(init=False)

    def __post_init__(self):
        if int(self.n_intervals) != self.n_intervals or self.n_intervals < 1:
            raise DomainError(f"n_intervals must be a positive integer, got {self.n_intervals!r}")
        if not (np.isfinite(self.a) and np.isfinite(self.b)):
            raise DomainError(f"bounds must be finite, got a={self.a}, b={self.b}")
        if not self.b > self.a:
            raise DomainError(f"need a < b, got a={self.a}, b={self.b}")
        object.__setattr__(self, "n_intervals", int(self.n_intervals))
        object.__setattr__(self, "step", (self.b - self.a) / self.n_intervals)

    @classmethod
    def from_step(cls, a, h, n_intervals):
        """Grid with ``n_intervals`` steps of (approximately) ``h`` starting at ``a``."""
        return cls(a, a + n_intervals * h, n_intervals)

    @property
    def h(self):
        return self.step

    @property
    def N(self):
        return self.n_intervals

    def node(self, i):
        return self.a + i * self.step

    def half_node(self, i):
        return (self.node(i) + self.node(i + 1)) / 2

    def nodes(self):
        return self.a + np.arange(self.n_intervals + 1) * self.step

    def half_nodes(self):
        t = self.nodes()
        return (t[:-1] + t[1:]) / 2

    def node_set(self, kind, lam=None):
        return NodeSet(kind, self, lam)


@dataclass(frozen=True)
class NodeSet:
    """A named node set of a :class:`TimeGrid`.

    ``lam`` is only meaningful (and required) for ``kind == "T_lambda"``.
    """

    kind: str
    grid: TimeGrid
    lam: float = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown node set {self.kind!r}; expected one of {KINDS}")
        if self.kind == "T_lambda":
            if self.lam is None or not 0.0 <= self.lam < 1.0:
                raise DomainError(f"T_lambda needs lam in [0, 1), got {self.lam!r}")
        elif self.lam is not None:
            raise DomainError(f"lam is only valid for T_lambda, not {self.kind}")

    @property
    def base(self):
        return _KINDS[self.kind][0]

    def base_size(self):
        n = self.grid.n_intervals
        return {"T": n + 1, "T_half": n, "T_circ": 2 * n + 1, "T_lambda": n}[self.base]

    @property
    def start(self):
        """First label belonging to the set."""
        return _KINDS[self.kind][1]

    @property
    def stop(self):
        """One past the last label belonging to the set."""
        return self.base_size() - _KINDS[self.kind][2]

    def __len__(self):
        return max(self.stop - self.start, 0)

    def labels(self):
        return range(self.start, self.stop)

    def contains(self, i):
        return self.start <= i < self.stop

    @property
    def spacing(self):
        """Distance between consecutive nodes of the base set."""
        return self.grid.step / 2 if self.base == "T_circ" else self.grid.step

    def time(self, i):
        g = self.grid
        if self.base == "T":
            return g.node(i)
        if self.base == "T_half":
            return g.half_node(i)
        if self.base == "T_circ":
            return g.node(i // 2) if i % 2 == 0 else g.half_node(i // 2)
        return (1 - self.lam) * g.node(i) + self.lam * g.node(i + 1)

    def times(self):
        return np.array([self.time(i) for i in self.labels()])

    def sub(self, suffix):
        """Sibling set on the same base, e.g. ``sub("minus")`` of ``T_half``."""
        stem = {"T": "T", "T_half": "T_half", "T_circ": "T_circ"}[self.base]
        kind = stem if suffix == "" else f"{stem}_{suffix}"
        return NodeSet(kind, self.grid)

    def _check(self, i, what):
        if not self.contains(i):
            raise DomainError(
                f"{what}: label {i} is not in {self.kind} "
                f"(valid labels {self.start}..{self.stop - 1}, N={self.grid.n_intervals})"
            )


def sigma(node_set, i):
    """Forward shift: label of the node one base step after label ``i``."""
    if node_set.base == "T_lambda":
        raise DomainError("sigma is not defined on T_lambda")
    node_set._check(i, "sigma")
    if i + 1 >= node_set.base_size():
        raise DomainError(f"sigma: label {i} of {node_set.kind} has no successor")
    return i + 1


def rho(node_set, i):
    """Backward shift: label of the node one base step before label ``i``."""
    if node_set.base == "T_lambda":
        raise DomainError("rho is not defined on T_lambda")
    node_set._check(i, "rho")
    if i - 1 < 0:
        raise DomainError(f"rho: label {i} of {node_set.kind} has no predecessor")
    return i - 1


def project_half(grid, i):
    """Map ``t_i`` in ``T_plus`` to the half node ``t_{i+1/2}``; returns its ``T_half`` label."""
    NodeSet("T_plus", grid)._check(i, "project_half")
    return i


def sigma_circ_of_node(grid, i):
    """``sigma_circ(t_i)`` as a ``T_half`` label: the half node just after ``t_i``."""
    NodeSet("T_plus", grid)._check(i, "sigma_circ")
    return i


def rho_circ_of_node(grid, i):
    """``rho_circ(t_i)`` as a ``T_half`` label: the half node just before ``t_i``."""
    NodeSet("T_minus", grid)._check(i, "rho_circ")
    return i - 1
