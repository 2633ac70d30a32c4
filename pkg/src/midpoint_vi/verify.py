"""
Randomised checks of the discrete calculus identities and scheme equivalences.

Every ``check_*`` function draws its instances from a seeded generator and
returns a :class:`CheckResult` holding the worst value observed, so failures
can be replayed from the seed.  :func:`run_all` runs the whole collection.
"""

from dataclasses import dataclass, field

import numpy as np

from . import calculus as calc
from . import hamiltonian as ham
from . import lagrangian as lag
from .problems import cosh_lagrangian, get_problem, harmonic_oscillator, make_mechanical, pendulum
from .solver import SolverConfig
from .time_grid import NodeSet, TimeGrid


@dataclass
class CheckResult:
    name: str
    worst: float
    tolerance: float
    passed: bool
    instances: int
    detail: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = "".join(f" {k}={v}" for k, v in self.detail.items())
        return f"{status}  {self.name:<34} worst={self.worst:.3e} tol={self.tolerance:.1e} n={self.instances}{extra}"


def _random_grid(rng, n_lo=2, n_hi=32):
    n = int(rng.integers(n_lo, n_hi + 1))
    a = float(rng.uniform(-1.0, 1.0))
    return TimeGrid(a, a + float(rng.uniform(0.5, 3.0)), n)


def _random_fn(rng, node_set, d):
    return calc.GridFunction(node_set, rng.normal(size=(len(node_set), d)))


def _smooth_path(rng, grid, d, speed=1.0):
    """Random trajectory with O(1) velocities."""
    steps = rng.normal(scale=speed, size=(grid.n_intervals, d)) * grid.step
    start = rng.normal(size=(1, d))
    return calc.GridFunction(NodeSet("T", grid), np.vstack([start, start + np.cumsum(steps, axis=0)]))


def check_circ_derivative(rng, instances=100, tol=1e-14):
    """``D_circ+[f_circ](t_{i+1/2}) == D+[f](t_i)``."""
    worst = 0.0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        f = _random_fn(rng, NodeSet("T", grid), d)
        lhs = calc.delta_plus(calc.extend(f)).values[1::2]
        rhs = calc.delta_plus(f).values
        scale = 2 * np.max(np.abs(f.values)) / grid.step
        worst = max(worst, calc.relative_gap(lhs, rhs, scale))
    return CheckResult("circ derivative relation", worst, tol, worst <= tol, instances)


def check_integration_by_parts(rng, instances=100, tol=1e-12):
    worst = 0.0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        f = _random_fn(rng, NodeSet("T_half", grid), d)
        v = _random_fn(rng, NodeSet("T", grid), d)
        lhs, rhs, scale = calc.integration_by_parts_sides(f, v)
        worst = max(worst, calc.relative_gap(lhs, rhs, scale))
    return CheckResult("integration by parts", worst, tol, worst <= tol, instances)


def check_averaging(rng, instances=100, tol=1e-12):
    """Half-node/node averaging identity for variations vanishing at both ends."""
    worst = 0.0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        f = _random_fn(rng, NodeSet("T_half", grid), d)
        vals = rng.normal(size=(grid.n_intervals + 1, d))
        vals[0] = vals[-1] = 0.0
        lhs, rhs, scale = calc.averaging_sides(f, calc.GridFunction(NodeSet("T", grid), vals))
        worst = max(worst, calc.relative_gap(lhs, rhs, scale))
    return CheckResult("averaging identity on C0", worst, tol, worst <= tol, instances)


def check_averaging_boundary(rng, instances=100, tol=1e-12):
    """Which boundary coefficient closes the identity when ``v`` does not vanish."""
    gaps = {"h": 0.0, "h/2": 0.0}
    fitted = []
    closes = set()
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        f = _random_fn(rng, NodeSet("T_half", grid), d)
        v = _random_fn(rng, NodeSet("T", grid), d)
        probe = calc.averaging_boundary_probe(f, v)
        for k in gaps:
            gaps[k] = max(gaps[k], probe["gaps"][k])
        fitted.append(probe["fitted_coefficient_over_h"])
        closes.add(probe["closes"])
    winner = closes.pop() if len(closes) == 1 else "inconsistent"
    ok = winner == "h/2" and gaps["h/2"] <= tol and gaps["h"] > tol
    return CheckResult(
        "averaging boundary coefficient", gaps["h/2"], tol, ok, instances,
        {"closes": winner, "gap_h": f"{gaps['h']:.2e}", "fitted/h": f"{np.median(fitted):.12f}"},
    )


def check_dubois_raymond(rng, instances=100):
    """Contrapositive: a function non-zero on ``T_pm`` is detected by some ``C_0`` variation."""
    failures = 0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        g = _random_fn(rng, NodeSet("T", grid), d)
        if calc.dubois_raymond_witness(g) is None:
            failures += 1
        # vanishing on the interior: nothing in C_0 can see it
        vals = np.zeros_like(g.values)
        vals[0], vals[-1] = g.values[0], g.values[-1]
        if calc.dubois_raymond_witness(calc.GridFunction(g.node_set, vals)) is not None:
            failures += 1
    return CheckResult("dubois-raymond contrapositive", float(failures), 0.0, failures == 0, instances)


def check_fundamental_theorem(rng, instances=100, tol=1e-12):
    worst = 0.0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        n = grid.n_intervals
        f = _random_fn(rng, NodeSet("T", grid), d)
        total = calc.integral_lambda(calc.delta_plus(f), 0.0, 0, n)
        scale = np.max(np.abs(f.values))
        worst = max(worst, calc.relative_gap(total, f.values[-1] - f.values[0], scale))
        g = _random_fn(rng, NodeSet("T_plus", grid), d)
        back = calc.delta_plus(calc.running_integral(g))
        worst = max(worst, calc.relative_gap(back.values, g.values, np.max(np.abs(g.values)) * n))
    return CheckResult("fundamental theorem", worst, tol, worst <= tol, instances)


def _frechet_models():
    return {
        "free_particle": lambda d: make_mechanical(get_problem("free_particle", d)),
        "harmonic": lambda d: make_mechanical(harmonic_oscillator(d)),
        "pendulum": lambda d: make_mechanical(pendulum(d)),
        "cosh": cosh_lagrangian,
    }


def check_frechet(rng, instances=50, tol=1e-6):
    """Frechet derivative versus a Richardson-extrapolated central difference of the action."""
    worst = 0.0
    count = 0
    for name, make in _frechet_models().items():
        for _ in range(instances):
            n = int(rng.choice([4, 8, 16]))
            d = int(rng.integers(1, 4))
            grid = TimeGrid(0.0, 1.0, n)
            L = make(d)
            q = _smooth_path(rng, grid, d)
            vals = rng.normal(size=(n + 1, d))
            vals[0] = vals[-1] = 0.0
            v = calc.GridFunction(q.node_set, vals)
            exact = lag.frechet_midpoint(L, q, v)

            def central(eps):
                plus = calc.GridFunction(q.node_set, q.values + eps * vals)
                minus = calc.GridFunction(q.node_set, q.values - eps * vals)
                return (lag.action_midpoint(L, plus) - lag.action_midpoint(L, minus)) / (2 * eps)

            eps = 1e-3
            fd = (4 * central(eps / 2) - central(eps)) / 3
            r = lag.el_residual_midpoint(L, q).values
            scale = max(abs(exact), grid.step * float(np.sum(np.abs(r * vals[1:-1]))))
            worst = max(worst, abs(exact - fd) / scale)
            count += 1
    return CheckResult("frechet derivative", worst, tol, worst <= tol, count)


def check_two_point_functional(rng, instances=100, tol=1e-14):
    worst = 0.0
    for _ in range(instances):
        grid, d = _random_grid(rng), int(rng.integers(1, 4))
        L = cosh_lagrangian(d) if rng.random() < 0.5 else make_mechanical(pendulum(d))
        q = _smooth_path(rng, grid, d)
        two_pt = sum(lag.two_point_lagrangian(L, q.values[i], q.values[i + 1], grid.step)
                     for i in range(grid.n_intervals))
        mid = lag.action_midpoint(L, q)
        qh, vh = lag.star_points(q)
        scale = grid.step * sum(abs(L.eval_L(a, b)) for a, b in zip(qh.values, vh.values))
        worst = max(worst, abs(two_pt - mid) / scale)
    return CheckResult("two-point action equality", worst, tol, worst <= tol, instances)


def _random_triple(rng, d, h):
    q_curr = rng.normal(size=d)
    return q_curr - h * rng.normal(size=d), q_curr, q_curr + h * rng.normal(size=d)


def _elpm_at(L, q_prev, q_curr, q_next, h):
    grid = TimeGrid(0.0, 2 * h, 2)
    q = calc.GridFunction(NodeSet("T", grid), np.vstack([q_prev, q_curr, q_next]))
    return lag.el_residual_midpoint(L, q).values[0]


def check_mechanical_form(rng, instances=100, tol=1e-12):
    """Mid-point residual equals the force-minus-acceleration form for ``|v|^2/2 - V``."""
    worst = 0.0
    for _ in range(instances):
        d, h = int(rng.integers(1, 4)), float(rng.uniform(0.01, 0.5))
        prob = pendulum(d) if rng.random() < 0.5 else harmonic_oscillator(d)
        L = make_mechanical(prob)
        a, b, c = _random_triple(rng, d, h)
        r = _elpm_at(L, a, b, c, h)
        m = lag.mechanical_el_residual(prob.potential_grad, a, b, c, h)
        scale = max(np.max(np.abs(b)) * 4 / h**2, np.max(np.abs(m)), 1.0)
        worst = max(worst, calc.relative_gap(r, m, scale))
    return CheckResult("mid-point residual == mechanical form", worst, tol, worst <= tol, instances)


def check_two_point_residual(rng, instances=100, tol=1e-12):
    """Two-point residual against ``c h`` times the mid-point residual, for ``c = +1`` and ``c = -1``."""
    worst = {+1: 0.0, -1: 0.0}
    for _ in range(instances):
        d, h = int(rng.integers(1, 4)), float(rng.uniform(0.01, 0.5))
        L = cosh_lagrangian(d) if rng.random() < 0.5 else make_mechanical(pendulum(d))
        a, b, c = _random_triple(rng, d, h)
        two_pt = lag.two_point_el_residual(L, a, b, c, h)
        r = _elpm_at(L, a, b, c, h)
        s1, s2 = lag.reconstruct_star(a, b, h), lag.reconstruct_star(b, c, h)
        scale = max(np.max(np.abs(L.grad_v(s.q_half, s.v_half))) for s in (s1, s2))
        for sign in worst:
            worst[sign] = max(worst[sign], calc.relative_gap(two_pt, sign * h * r, scale))
    ok = worst[+1] <= tol and worst[-1] > tol
    return CheckResult("two-point residual == +h * mid-point residual", worst[+1], tol, ok, instances,
                       {"gap_for_minus_h": f"{worst[-1]:.2e}"})


def check_scheme_consistency(rng, instances=50, cfg=SolverConfig()):
    """``h`` times the residual after each implicit step, forwards and time-reversed."""
    worst = 0.0
    worst_rev = 0.0
    for _ in range(instances):
        d = int(rng.integers(1, 4))
        h = float(rng.uniform(0.01, 0.2))
        L = cosh_lagrangian(d) if rng.random() < 0.5 else make_mechanical(pendulum(d))
        q0 = rng.normal(size=d)
        q1 = q0 + h * rng.normal(size=d)
        q2 = lag.step_midpoint_lagrangian(L, q0, q1, h, cfg)
        # the step solves h * residual = 0 in momentum units
        worst = max(worst, h * float(np.max(np.abs(_elpm_at(L, q0, q1, q2, h)))))
        if L.name == "pendulum":
            worst_rev = max(worst_rev, h * float(np.max(np.abs(_elpm_at(L, q2, q1, q0, h)))))
    ok = worst <= cfg.tol and worst_rev <= cfg.tol
    return CheckResult("scheme residual + time reversal", max(worst, worst_rev), cfg.tol, ok, instances)


def _hamiltonian_pair(L, q0, p0, h, n, cfg):
    grid = TimeGrid(0.0, n * h, n)
    rh = ham.integrate_hamiltonian(L, ham.PhasePoint(q0, p0), grid, cfg)
    rl = lag.integrate_lagrangian(L, rh.q[0], rh.q[1], grid, cfg)
    return grid, rh, rl


def check_lagrangian_hamiltonian(rng, instances=5, tol=1e-10, cfg=SolverConfig()):
    """Hamiltonian run vs Lagrangian run seeded with its first step (harmonic, h = 0.05, N = 100)."""
    worst = 0.0
    L = make_mechanical(harmonic_oscillator())
    for _ in range(instances):
        _, rh, rl = _hamiltonian_pair(L, rng.normal(size=1), rng.normal(size=1), 0.05, 100, cfg)
        worst = max(worst, float(np.max(np.abs(rh.q - rl.q))), float(np.max(np.abs(rh.p - rl.p))))
    return CheckResult("lagrangian == hamiltonian runs", worst, tol, worst <= tol, instances)


def check_momentum(rng, instances=10, tol=1e-10, cfg=SolverConfig()):
    """Momentum constraint, overlap coherence and the +-dLd momentum formulas."""
    worst = {"constraint": 0.0, "overlap": 0.0, "from_left": 0.0, "from_right": 0.0, "vs_scheme": 0.0}
    for k in range(instances):
        d = int(rng.integers(1, 3))
        L = cosh_lagrangian(d) if k % 2 else make_mechanical(pendulum(d))
        h, n = 0.05, 40
        q0, p0 = 0.5 * rng.normal(size=d), 0.5 * rng.normal(size=d)
        grid, rh, _ = _hamiltonian_pair(L, q0, p0, h, n, cfg)
        q = calc.GridFunction(NodeSet("T", grid), rh.q)
        p = ham.discrete_momentum(L, q)
        worst["vs_scheme"] = max(worst["vs_scheme"], float(np.max(np.abs(p.values - rh.p))))
        worst["constraint"] = max(worst["constraint"],
                                  float(np.max(np.abs(ham.momentum_constraint_residual(L, q, p).values))))
        for i in range(1, n):
            # p(t_i) seen from the interval on its right must match the left-interval formula
            s = lag.reconstruct_star(rh.q[i], rh.q[i + 1], h)
            right = L.grad_v(s.q_half, s.v_half) - h / 2 * L.grad_q(s.q_half, s.v_half)
            worst["overlap"] = max(worst["overlap"], float(np.max(np.abs(right - p.values[i]))))
        for i in range(0, n + 1):
            if i >= 1:
                _, dy = lag.two_point_partials(L, rh.q[i - 1], rh.q[i], h)
                worst["from_left"] = max(worst["from_left"], float(np.max(np.abs(dy - p.values[i]))))
            if i <= n - 1:
                dx, _ = lag.two_point_partials(L, rh.q[i], rh.q[i + 1], h)
                worst["from_right"] = max(worst["from_right"], float(np.max(np.abs(-dx - p.values[i]))))
    top = max(worst.values())
    return CheckResult("momentum coherence", top, tol, top <= tol, instances,
                       {k: f"{v:.1e}" for k, v in worst.items()})


def check_criticality(rng, instances=4, tol=1e-8, cfg=SolverConfig()):
    """SH residuals and action derivatives vanish on solutions and not on perturbations."""
    worst = 0.0
    perturbed_ok = True
    for k in range(instances):
        L = cosh_lagrangian(1) if k % 2 else make_mechanical(pendulum(1))
        grid = TimeGrid(0.0, 1.0, 10)
        rec = ham.integrate_hamiltonian(L, ham.PhasePoint(rng.normal(size=1), rng.normal(size=1)), grid, cfg)
        q = calc.GridFunction(NodeSet("T", grid), rec.q)
        p = calc.GridFunction(NodeSet("T", grid), rec.p)
        rep = ham.criticality_check(L, q, p, cfg, tol=tol)
        worst = max(worst, rep["max_directional_derivative"], rep["max_sh_residual"])
        bumped = rec.q.copy()
        bumped[5] += 1e-3
        rep2 = ham.criticality_check(L, calc.GridFunction(q.node_set, bumped), p, cfg, tol=tol)
        perturbed_ok &= not rep2["critical"]
    return CheckResult("action_H criticality", worst, tol, worst <= tol and perturbed_ok, instances,
                       {"perturbed_rejected": perturbed_ok})


def check_hamiltonian_gradients(rng, instances=50, tol=1e-6, cfg=SolverConfig()):
    worst = 0.0
    for k in range(instances):
        d = int(rng.integers(1, 4))
        L = cosh_lagrangian(d) if k % 2 else make_mechanical(pendulum(d))
        H = ham.build_hamiltonian(L, cfg)
        p, q = rng.normal(size=d), rng.normal(size=d)
        for which, exact in (("p", H.grad_p(p, q)), ("q", H.grad_q(p, q))):
            fd = np.empty(d)
            for c in range(d):
                e = np.zeros(d)
                e[c] = 1e-6
                if which == "p":
                    fd[c] = (H.eval_H(p + e, q) - H.eval_H(p - e, q)) / 2e-6
                else:
                    fd[c] = (H.eval_H(p, q + e) - H.eval_H(p, q - e)) / 2e-6
            worst = max(worst, float(np.max(np.abs(fd - exact)) / max(1.0, np.max(np.abs(exact)))))
    return CheckResult("hamiltonian gradient identities", worst, tol, worst <= tol, instances)


def check_quadratic_invariant(rng, instances=5, cfg=SolverConfig()):
    """``p^2 + q^2`` along mid-point Hamiltonian runs of the harmonic oscillator."""
    worst = 0.0
    n = 200
    L = make_mechanical(get_problem("harmonic"))
    for _ in range(instances):
        grid = TimeGrid(0.0, n * 0.1, n)
        rec = ham.integrate_hamiltonian(L, ham.PhasePoint(rng.normal(size=1), rng.normal(size=1)), grid, cfg)
        inv = np.sum(rec.p**2 + rec.q**2, axis=1)
        worst = max(worst, float(np.max(np.abs(inv - inv[0]))))
    tol = n * 10 * cfg.tol
    return CheckResult("harmonic quadratic invariant", worst, tol, worst <= tol, instances)


CALCULUS_CHECKS = (
    check_circ_derivative,
    check_integration_by_parts,
    check_averaging,
    check_averaging_boundary,
    check_dubois_raymond,
    check_fundamental_theorem,
)

SCHEME_CHECKS = (
    check_frechet,
    check_two_point_functional,
    check_mechanical_form,
    check_two_point_residual,
    check_scheme_consistency,
    check_lagrangian_hamiltonian,
    check_momentum,
    check_criticality,
    check_hamiltonian_gradients,
    check_quadratic_invariant,
)


def run_all(seed=0, scale=1.0):
    """Run every check; ``scale`` multiplies the instance counts (at least one each)."""
    rng = np.random.default_rng(seed)
    results = []
    for check in CALCULUS_CHECKS + SCHEME_CHECKS:
        default = check.__defaults__[0] if check.__defaults__ else 1
        results.append(check(rng, max(1, int(round(default * scale)))))
    return results
