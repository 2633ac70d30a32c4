"""Command-line entry point: ``simulate``, ``converge`` and ``verify``.

Exit codes: 0 on success, 1 on usage errors, 2 when the solver fails (a
partial CSV is still written) or when a verification check fails.

Settings may also come from ``--config FILE`` holding ``key=value`` lines
(keys are flag names without the dashes); flags given on the command line win.
"""

import argparse
import sys
import time

import numpy as np

from .errors import ConvergenceError, DomainError, StepFailure
from .hamiltonian import PhasePoint
from .problems import PROBLEMS, get_problem, make_mechanical
from .solver import SolverConfig
from .study import SCHEMES, converge, run_scheme
from .time_grid import TimeGrid
from .verify import run_all

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _vector(text):
    try:
        return np.array([float(x) for x in str(text).split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _floats(text):
    return sorted(_vector(text), reverse=True)


def build_parser():
    parser = _Parser(prog="midpoint-vi", description="Mid-point variational integrators.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("--tol", type=float, help="Newton residual tolerance (default 1e-12)")
        p.add_argument("--max-iter", type=int, help="Newton iteration cap (default 50)")
        p.add_argument("--method", choices=("newton", "fixed_point"))

    sim = sub.add_parser("simulate", help="integrate one trajectory and write CSV")
    common(sim)
    sim.add_argument("--problem", choices=sorted(PROBLEMS))
    sim.add_argument("--scheme")
    sim.add_argument("--h", type=float)
    sim.add_argument("--n", type=int, help="number of steps")
    sim.add_argument("--tmax", type=float, help="final time, used when --n is absent")
    sim.add_argument("--q0", type=_vector)
    sim.add_argument("--p0", type=_vector)
    sim.add_argument("--q1", type=_vector, help="second node for midpoint_lagrangian")
    sim.add_argument("--out", help="CSV path (default: stdout)")

    conv = sub.add_parser("converge", help="global error and observed order over a step sweep")
    common(conv)
    conv.add_argument("--problem", choices=sorted(PROBLEMS))
    conv.add_argument("--scheme")
    conv.add_argument("--hs", type=_floats, help="comma-separated step sizes")
    conv.add_argument("--tmax", type=float)
    conv.add_argument("--q0", type=_vector)
    conv.add_argument("--p0", type=_vector)
    conv.add_argument("--out", help="write the table here as well as to stdout")

    ver = sub.add_parser("verify", help="randomised identity and equivalence checks")
    ver.add_argument("--config")
    ver.add_argument("--seed", type=int)
    ver.add_argument("--sizes", type=float, help="multiplier on the number of random instances")
    return parser


DEFAULTS = {
    "simulate": dict(problem="harmonic", scheme="midpoint_hamiltonian", h=0.01, n=None, tmax=10.0,
                     q0="1", p0="0", q1=None, out=None, tol=1e-12, max_iter=50, method="newton"),
    "converge": dict(problem="harmonic", scheme="midpoint_hamiltonian", hs="0.1,0.05,0.025,0.0125",
                     tmax=1.0, q0="1", p0="0", out=None, tol=1e-12, max_iter=50, method="newton"),
    "verify": dict(seed=0, sizes=1.0),
}


def read_config(path):
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


def resolve(args):
    """Merge defaults, config file and flags (in increasing precedence) into a namespace."""
    defaults = DEFAULTS[args.command]
    merged = dict(defaults)
    if args.config:
        try:
            cfg = read_config(args.config)
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    conv = {"h": float, "tmax": float, "tol": float, "n": int, "max_iter": int, "seed": int, "sizes": float,
            "q0": _vector, "p0": _vector, "q1": _vector, "hs": _floats}
    for key, fn in conv.items():
        if key in merged and merged[key] is not None and isinstance(merged[key], str):
            try:
                merged[key] = fn(merged[key])
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
    if "problem" in merged and merged["problem"] not in PROBLEMS:
        raise UsageError(f"unknown problem {merged['problem']!r}")
    if "scheme" in merged and merged["scheme"] not in SCHEMES:
        raise UsageError(f"unknown scheme {merged['scheme']!r}; choose from {', '.join(SCHEMES)}")
    return argparse.Namespace(command=args.command, **merged)


def _solver_config(ns):
    try:
        return SolverConfig(tol=ns.tol, max_iter=ns.max_iter, method=ns.method)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None


def _initial(ns):
    if len(ns.q0) != len(ns.p0):
        raise UsageError("q0 and p0 must have the same number of components")
    return PhasePoint(ns.q0, ns.p0)


def _write(record, out):
    if out is None:
        record.write_csv(sys.stdout)
    else:
        record.write_csv(out)


def cmd_simulate(ns, log=None):
    log = log or sys.stderr
    cfg = _solver_config(ns)
    initial = _initial(ns)
    if not ns.h or ns.h <= 0:
        raise UsageError("h must be positive")
    n = ns.n if ns.n is not None else int(round(ns.tmax / ns.h))
    if n < 2:
        raise UsageError("need at least two steps")
    problem = get_problem(ns.problem, dim=len(initial.q))
    L = make_mechanical(problem)
    grid = TimeGrid.from_step(0.0, ns.h, n)
    q1 = ns.q1
    if q1 is not None and len(q1) != len(initial.q):
        raise UsageError("q1 must have as many components as q0")
    meta = {"problem": problem.name, "scheme": ns.scheme}
    started = time.perf_counter()
    try:
        record = run_scheme(L, ns.scheme, initial, grid, cfg, q1=q1)
    except StepFailure as exc:
        record = exc.partial
        record.meta.update(meta)
        record.failure = str(exc)
        _write(record, ns.out)
        print(f"solver failure at step {exc.step}: {exc.cause}", file=log)
        return EXIT_FAILURE
    record.meta.update(meta)
    record.meta["seconds"] = round(time.perf_counter() - started, 3)
    _write(record, ns.out)
    print(f"max energy deviation: {record.max_energy_deviation():.6e}", file=log)
    return EXIT_OK


def cmd_converge(ns, log=None):
    log = log or sys.stdout
    cfg = _solver_config(ns)
    initial = _initial(ns)
    problem = get_problem(ns.problem, dim=len(initial.q))
    try:
        table = converge(problem, ns.scheme, initial, ns.hs, ns.tmax, cfg)
    except StepFailure as exc:
        print(f"solver failure at step {exc.step}: {exc.cause}", file=sys.stderr)
        return EXIT_FAILURE
    text = table.format()
    print(text, file=log)
    if ns.out:
        with open(ns.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_verify(ns, log=None):
    log = log or sys.stdout
    print(f"seed={ns.seed}", file=log)
    started = time.perf_counter()
    results = run_all(seed=ns.seed, scale=ns.sizes)
    for r in results:
        print(r.line(), file=log)
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} passed in {time.perf_counter() - started:.2f}s (seed={ns.seed})",
          file=log)
    return EXIT_OK if failed == 0 else EXIT_FAILURE


COMMANDS = {"simulate": cmd_simulate, "converge": cmd_converge, "verify": cmd_verify}


def main(argv=None):
    try:
        ns = resolve(build_parser().parse_args(argv))
        return COMMANDS[ns.command](ns)
    except (UsageError, DomainError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
