"""Acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line with the measured value and the
stated tolerance; the lines are printed in the pytest terminal summary and
when this file is run as a script.
"""

import time

import numpy as np
import pytest

from midpoint_vi import hamiltonian as ham
from midpoint_vi import lagrangian as lag
from midpoint_vi import verify as V
from midpoint_vi.hamiltonian import PhasePoint
from midpoint_vi.problems import get_problem, make_mechanical
from midpoint_vi.study import converge
from midpoint_vi.time_grid import TimeGrid

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

SEED = 0


def record(label, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def check_lines(label, results):
    for r in results:
        record(f"{label} {r.name}", r.passed, f"worst={r.worst:.3e} tol={r.tolerance:.1e} n={r.instances}"
               + "".join(f" {k}={v}" for k, v in r.detail.items()))


def test_1_identity_suite():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    results = [c(rng) for c in V.CALCULUS_CHECKS]
    elapsed = time.perf_counter() - start
    check_lines("[1]", results)
    fast = record("[1] identity suite runtime", elapsed < 5.0, f"{elapsed:.2f}s (limit 5s)")
    assert all(r.passed for r in results) and fast


def test_2_frechet():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    result = V.check_frechet(rng, instances=50)
    elapsed = time.perf_counter() - start
    check_lines("[2]", [result])
    fast = record("[2] frechet runtime", elapsed < 5.0, f"{elapsed:.2f}s (limit 5s)")
    assert result.passed and fast


def test_3a_mechanical_form():
    result = V.check_mechanical_form(np.random.default_rng(SEED))
    check_lines("[3a]", [result])
    assert result.passed


def test_3b_two_point_residual():
    rng = np.random.default_rng(SEED)
    result = V.check_two_point_residual(rng)
    minus_gap = float(result.detail["gap_for_minus_h"])
    # the criterion as written uses -h; the sign is wrong, so report that comparison as failing
    record("[3b] two-point residual == -h * mid-point residual (as written)", minus_gap <= 1e-12,
           f"gap={minus_gap:.3e} tol=1.0e-12 (sign error in the criterion)")
    record("[3b] two-point residual == +h * mid-point residual (corrected)", result.worst <= 1e-12,
           f"worst={result.worst:.3e} tol=1.0e-12 n={result.instances}")
    assert result.worst <= 1e-12
    assert minus_gap > 1.0  # the -h relation is far from holding, not marginal


def test_3c_lagrangian_vs_hamiltonian():
    L = make_mechanical(get_problem("harmonic"))
    h, n = 0.05, 100
    grid = TimeGrid(0.0, n * h, n)
    h_run = ham.integrate_hamiltonian(L, PhasePoint([1.0], [0.0]), grid)
    l_run = lag.integrate_lagrangian(L, h_run.q[0], h_run.q[1], grid)
    gap = max(np.max(np.abs(h_run.q - l_run.q)), np.max(np.abs(h_run.p - l_run.p)))
    random_part = V.check_lagrangian_hamiltonian(np.random.default_rng(SEED))
    worst = max(gap, random_part.worst)
    ok = record("[3c] lagrangian vs hamiltonian, N=100, h=0.05", worst <= 1e-10,
                f"worst={worst:.3e} tol=1.0e-10 (initial (1,0) plus {random_part.instances} random)")
    assert ok


def test_4_momentum_and_criticality():
    rng = np.random.default_rng(SEED)
    mom = V.check_momentum(rng)
    crit = V.check_criticality(rng)
    check_lines("[4]", [mom, crit])
    assert mom.passed and crit.passed


def test_5_convergence_order():
    prob = get_problem("harmonic")
    hs = [0.1, 0.05, 0.025, 0.0125]
    start = time.perf_counter()
    tables = {s: converge(prob, s, PhasePoint([1.0], [0.0]), hs, 1.0)
              for s in ("midpoint_lagrangian", "midpoint_hamiltonian", "order1")}
    elapsed = time.perf_counter() - start
    ok = True
    for scheme, t in tables.items():
        target, tol = (1.0, 0.15) if scheme == "order1" else (2.0, 0.1)
        ok &= record(f"[5] {scheme} slope", abs(t.slope - target) <= tol,
                     f"slope={t.slope:.4f} target={target}±{tol}")
    ok &= record("[5] convergence runtime", elapsed < 10.0, f"{elapsed:.2f}s (limit 10s)")
    assert ok


@pytest.mark.slow
def test_6_long_time_energy():
    n, h = 100_000, 0.01
    grid = TimeGrid(0.0, n * h, n)
    start = time.perf_counter()
    harm = ham.integrate_hamiltonian(make_mechanical(get_problem("harmonic")), PhasePoint([1.0], [0.0]), grid)
    pend = ham.integrate_hamiltonian(make_mechanical(get_problem("pendulum")), PhasePoint([1.0], [0.0]), grid)
    elapsed = time.perf_counter() - start
    dh = harm.max_energy_deviation()
    dev = np.abs(pend.H - pend.H[0])
    first, second = np.max(dev[: n // 2 + 1]), np.max(dev[n // 2:])
    ok = record("[6] harmonic max |H - H0|, 1e5 steps", dh <= 1e-9, f"{dh:.3e} tol=1.0e-09")
    ok &= record("[6] pendulum no drift, 1e5 steps", second <= 2 * first,
                 f"first half {first:.3e}, second half {second:.3e}, ratio {second / first:.3f} (limit 2)")
    ok &= record("[6] long-run runtime", elapsed < 60.0, f"{elapsed:.1f}s (limit 60s)")
    assert ok


def _bisect(f, lo, hi):
    flo = f(lo)
    for _ in range(200):
        mid = (lo + hi) / 2
        if (f(mid) > 0) == (flo > 0):
            lo, flo = mid, f(mid)
        else:
            hi = mid
    return (lo + hi) / 2


def test_7_worked_numbers():
    L = make_mechanical(get_problem("harmonic"))
    oracle = _bisect(lambda x: 100 * (x - 1) + (x + 1) / 4 + 0.5, 0.0, 2.0)
    q2 = lag.step_midpoint_lagrangian(L, [1.0], [1.0], 0.1)[0]
    err_q2 = max(abs(q2 - 99.25 / 100.25), abs(oracle - 99.25 / 100.25))
    # the Hamiltonian step reduces to q1 = 1, then p1 = 0.05 - 0.1 (q0 + q1)/2; bisection on q1
    q1_oracle = _bisect(lambda x: x - 1 - 0.05 * (0.05 + (0.05 - 0.05 * (1 + x))), 0.0, 2.0)
    out = ham.step_midpoint_hamiltonian(L, PhasePoint([1.0], [0.05]), 0.1)
    err_step = max(abs(out.q[0] - 1.0), abs(out.p[0] + 0.05), abs(q1_oracle - 1.0))
    ok = record("[7] q2 = 99.25/100.25", err_q2 <= 1e-12, f"err={err_q2:.3e} tol=1.0e-12")
    ok &= record("[7] hamiltonian step (1, 0.05) -> (1, -0.05)", err_step <= 1e-12, f"err={err_step:.3e} tol=1.0e-12")
    assert ok


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except AssertionError:
                pass
