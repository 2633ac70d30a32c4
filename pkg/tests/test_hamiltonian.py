import numpy as np
import pytest

from midpoint_vi import hamiltonian as ham
from midpoint_vi import lagrangian as lag
from midpoint_vi.calculus import GridFunction
from midpoint_vi.errors import DomainError, StepFailure
from midpoint_vi.hamiltonian import PhasePoint
from midpoint_vi.problems import constant_potential, free_particle, make_mechanical
from midpoint_vi.solver import SolverConfig
from midpoint_vi.time_grid import NodeSet, TimeGrid

Q2 = 99.25 / 100.25


def on_T(grid, values):
    return GridFunction(NodeSet("T", grid), np.asarray(values, float))


@pytest.fixture
def free():
    return make_mechanical(free_particle())


def test_legendre_inverse_examples(harmonic):
    assert ham.legendre_inverse(harmonic, [0.7], [3.0])[0] == 0.7
    heavy = lag.LagrangianModel(1, lambda q, v: float(v @ v) - float(q @ q), grad_v=lambda q, v: 2 * v)  # m = 2
    assert ham.legendre_inverse(heavy, [1.0], [0.0])[0] == pytest.approx(0.5, abs=1e-15)
    # central-difference gradients carry ~1e-10 noise, so the tolerance must sit above it
    numeric = lag.LagrangianModel(1, lambda q, v: float(v @ v) - float(q @ q))
    assert ham.legendre_inverse(numeric, [1.0], [0.0], SolverConfig(tol=1e-8))[0] == pytest.approx(0.5, abs=1e-8)
    # no analytic inverse: Newton on sinh(v) = 1
    cosh_num = lag.LagrangianModel(1, lambda q, v: float(np.sum(np.cosh(v))), grad_v=lambda q, v: np.sinh(v))
    v = ham.legendre_inverse(cosh_num, [1.0], [0.0])[0]
    assert v == pytest.approx(0.8813735870, abs=1e-10)
    assert v == pytest.approx(np.log(1 + np.sqrt(2)), abs=1e-12)


def test_build_hamiltonian_examples(harmonic, pendulum_L, free, rng):
    H = ham.build_hamiltonian(harmonic)
    assert H.eval_H([0.05], [1.0]) == pytest.approx(0.50125, abs=1e-15)
    p, q = rng.normal(size=1), rng.normal(size=1)
    Hp = ham.build_hamiltonian(pendulum_L)
    assert Hp.eval_H(p, q) == pytest.approx(0.5 * p[0] ** 2 - np.cos(q[0]))
    Hf = ham.build_hamiltonian(free)
    assert Hf.eval_H(p, q) == pytest.approx(0.5 * p[0] ** 2)
    assert np.all(Hf.grad_q(p, q) == 0.0)


def test_hamiltonian_gradients_non_quadratic(cosh_L, rng):
    H = ham.build_hamiltonian(cosh_L)
    p, q = rng.normal(size=1), rng.normal(size=1)
    e = 1e-6
    assert H.grad_p(p, q)[0] == pytest.approx((H.eval_H(p + e, q) - H.eval_H(p - e, q)) / (2 * e), rel=1e-6)
    assert H.grad_q(p, q)[0] == pytest.approx((H.eval_H(p, q + e) - H.eval_H(p, q - e)) / (2 * e), rel=1e-6)


def test_discrete_momentum_examples(harmonic, free):
    p = ham.discrete_momentum(harmonic, on_T(TimeGrid(0, 0.1, 1), [1, 1]))
    assert np.allclose(p.values.ravel(), [0.05, -0.05], atol=1e-16)
    g = TimeGrid(0, 1, 5)
    p = ham.discrete_momentum(free, on_T(g, 0.3 + 1.7 * g.nodes()))
    assert np.allclose(p.values, 1.7, atol=1e-14)
    p = ham.discrete_momentum(harmonic, on_T(g, np.zeros(6)))
    assert np.all(p.values == 0.0)


def test_momentum_constraint(pendulum_L, free):
    g = TimeGrid(0, 1, 20)
    rec = lag.integrate_lagrangian(pendulum_L, [0.5], [0.52], g)
    q = on_T(g, rec.q)
    p = ham.discrete_momentum(pendulum_L, q)
    res = ham.momentum_constraint_residual(pendulum_L, q, p)
    assert res.node_set.kind == "T_half"
    assert np.max(np.abs(res.values)) <= 1e-12
    line = on_T(g, 2 * g.nodes())
    assert np.max(np.abs(ham.momentum_constraint_residual(free, line, on_T(g, np.full(21, 2.0))).values)) <= 1e-13


def test_momentum_constraint_is_linear_in_p(harmonic, rng):
    g = TimeGrid(0, 1, 6)
    q = on_T(g, rng.normal(size=7))
    p = rng.normal(size=7)
    base = ham.momentum_constraint_residual(harmonic, q, on_T(g, p)).values.ravel()
    p[3] += 0.25
    bumped = ham.momentum_constraint_residual(harmonic, q, on_T(g, p)).values.ravel()
    assert np.allclose(bumped - base, [0, 0, 0.125, 0.125, 0, 0], atol=1e-15)


def test_step_worked_example(harmonic):
    # oracle: the scheme is linear here, p1 = 0.05 - 0.1 (q0 + q1)/2, q1 = 1 + 0.1 (0.05 + p1)/2
    A = np.array([[1.0, -0.05], [0.05, 1.0]])
    q1, p1 = np.linalg.solve(A, [1.0 + 0.0025, 0.05 - 0.05])
    assert (q1, p1) == pytest.approx((1.0, -0.05), abs=1e-15)
    out = ham.step_midpoint_hamiltonian(harmonic, PhasePoint([1.0], [0.05]), 0.1)
    assert abs(out.q[0] - 1.0) <= 1e-12 and abs(out.p[0] + 0.05) <= 1e-12


def test_step_free_and_constant(free):
    out = ham.step_midpoint_hamiltonian(free, PhasePoint([0.0], [1.0]), 0.3)
    assert out.q[0] == pytest.approx(0.3, abs=1e-15) and out.p[0] == 1.0
    cst = make_mechanical(constant_potential(5.0))
    other = ham.step_midpoint_hamiltonian(cst, PhasePoint([0.0], [1.0]), 0.3)
    assert np.array_equal(other.q, out.q) and np.array_equal(other.p, out.p)
    with pytest.raises(DomainError):
        ham.step_midpoint_hamiltonian(free, PhasePoint([0.0], [1.0]), -0.1)


def test_integrate_examples(free, harmonic):
    rec = ham.integrate_hamiltonian(free, PhasePoint([0.0], [1.0]), TimeGrid(0, 1, 10))
    assert rec.q[-1, 0] == pytest.approx(1.0, abs=1e-14)
    assert np.all(rec.p == 1.0)
    two = ham.integrate_hamiltonian(harmonic, PhasePoint([1.0], [0.05]), TimeGrid(0, 0.2, 2))
    assert np.allclose(two.q.ravel(), [1, 1, Q2], atol=1e-12)
    seeded = lag.integrate_lagrangian(harmonic, [1.0], [1.0], TimeGrid(0, 0.2, 2))
    assert np.allclose(two.q, seeded.q, atol=1e-12)
    long = ham.integrate_hamiltonian(harmonic, PhasePoint([1.0], [0.0]), TimeGrid(0, 10, 1000))
    assert len(long) == 1001
    assert long.max_energy_deviation() <= 1e-3


def test_lagrangian_and_hamiltonian_runs_agree(cosh_L):
    g = TimeGrid(0, 3, 60)
    h_run = ham.integrate_hamiltonian(cosh_L, PhasePoint([0.4], [-0.8]), g)
    l_run = lag.integrate_lagrangian(cosh_L, h_run.q[0], h_run.q[1], g)
    assert np.max(np.abs(h_run.q - l_run.q)) <= 1e-10
    assert np.max(np.abs(h_run.p - l_run.p)) <= 1e-10


def test_sh_residual(pendulum_L, free, rng):
    g = TimeGrid(0, 1, 12)
    rec = ham.integrate_hamiltonian(pendulum_L, PhasePoint([0.9], [0.2]), g)
    res = ham.sh_residual(pendulum_L, on_T(g, rec.q), on_T(g, rec.p))
    assert res["momentum"].node_set.kind == "T_half_minus"
    assert res["position"].node_set.kind == "T_half"
    assert max(np.max(np.abs(r.values)) for r in res.values()) <= 1e-12
    line = on_T(g, g.nodes())
    zero = ham.sh_residual(free, line, on_T(g, np.ones(13)))
    assert max(np.max(np.abs(r.values)) for r in zero.values()) <= 1e-14
    noise = ham.sh_residual(pendulum_L, on_T(g, rng.normal(size=13)), on_T(g, rng.normal(size=13)))
    assert max(np.max(np.abs(r.values)) for r in noise.values()) > 1e-3


def test_action_h_examples(harmonic, free):
    g = TimeGrid(0, 2, 4)
    assert ham.action_H(free, on_T(g, np.ones(5)), on_T(g, g.nodes())) == pytest.approx(1.0)
    assert ham.action_H(free, on_T(g, np.zeros(5)), on_T(g, np.zeros(5))) == 0.0
    one = TimeGrid(0, 0.1, 1)
    assert ham.action_H(harmonic, on_T(one, [0.05, -0.05]), on_T(one, [1, 1])) == pytest.approx(-0.05, abs=1e-15)


def test_action_h_gradient_matches_finite_differences(cosh_L, rng):
    g = TimeGrid(0, 1, 5)
    q, p = rng.normal(size=(6, 1)), rng.normal(size=(6, 1))
    dp, dq = ham.action_H_gradient(cosh_L, on_T(g, p), on_T(g, q))
    e = 1e-6
    for k in range(6):
        for arr, exact in ((p, dp), (q, dq)):
            plus, minus = arr.copy(), arr.copy()
            plus[k] += e
            minus[k] -= e
            if arr is p:
                fd = (ham.action_H(cosh_L, on_T(g, plus), on_T(g, q)) - ham.action_H(cosh_L, on_T(g, minus), on_T(g, q)))
            else:
                fd = (ham.action_H(cosh_L, on_T(g, p), on_T(g, plus)) - ham.action_H(cosh_L, on_T(g, p), on_T(g, minus)))
            assert exact[k, 0] == pytest.approx(fd / (2 * e), abs=1e-8)


def test_criticality(pendulum_L, rng):
    g = TimeGrid(0, 1, 8)
    rec = ham.integrate_hamiltonian(pendulum_L, PhasePoint([0.3], [0.6]), g)
    q, p = on_T(g, rec.q), on_T(g, rec.p)
    rep = ham.criticality_check(pendulum_L, q, p)
    assert rep["critical"] and rep["max_directional_derivative"] <= 1e-8
    assert rep["max_exact_derivative"] <= 1e-10
    noisy = ham.criticality_check(pendulum_L, on_T(g, rng.normal(size=9)), on_T(g, rng.normal(size=9)))
    assert not noisy["critical"] and noisy["max_directional_derivative"] > 0


def test_endpoint_momentum_variation_is_boundary_equation(pendulum_L):
    # dA/dp_N = (h/2)(D+q - dH/dp) at the last half node: the boundary position equation
    g = TimeGrid(0, 1, 6)
    rec = ham.integrate_hamiltonian(pendulum_L, PhasePoint([0.3], [0.6]), g)
    q = rec.q.copy()
    q[-1] += 1e-3  # break the last position equation only
    p = on_T(g, rec.p)
    e = 1e-6
    pp, pm = rec.p.copy(), rec.p.copy()
    pp[-1] += e
    pm[-1] -= e
    fd = (ham.action_H(pendulum_L, on_T(g, pp), on_T(g, q)) - ham.action_H(pendulum_L, on_T(g, pm), on_T(g, q))) / (2 * e)
    res = ham.sh_residual(pendulum_L, on_T(g, q), p)["position"].values[-1, 0]
    assert fd == pytest.approx(g.step / 2 * res, rel=1e-6)
    assert abs(res) > 1e-3


def test_order1_step_and_run(harmonic, free):
    g = TimeGrid(0, 1, 10)
    rec = ham.integrate_order1_hamiltonian(free, PhasePoint([0.0], [2.0]), g)
    assert np.allclose(rec.q.ravel(), 2 * g.nodes(), atol=1e-14)
    one = ham.integrate_order1_hamiltonian(harmonic, PhasePoint([1.0], [0.0]), TimeGrid(0, 0.1, 1))
    # q1 = q0 + h p0, p1 = p0 - h q1
    assert one.q[1, 0] == 1.0 and one.p[1, 0] == pytest.approx(-0.1, abs=1e-15)


def test_integrate_failure_has_partial(pendulum_L):
    with pytest.raises(StepFailure) as info:
        ham.integrate_hamiltonian(pendulum_L, PhasePoint([1.0], [3.0]), TimeGrid(0, 50, 10), SolverConfig(max_iter=2))
    assert len(info.value.partial) == info.value.step
    assert info.value.partial.q[0, 0] == 1.0


def test_phase_point_validation():
    with pytest.raises(DomainError):
        PhasePoint([1.0, 2.0], [1.0])
    with pytest.raises(DomainError):
        PhasePoint([np.nan], [1.0])


def test_hamiltonian_seeded_q1(harmonic):
    assert ham.hamiltonian_seeded_q1(harmonic, [1.0], [0.05], 0.1)[0] == pytest.approx(1.0, abs=1e-12)
