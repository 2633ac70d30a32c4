"""Small dense root finder used by the implicit steps and the Legendre inversion."""

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ConvergenceError, DomainError

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and iteration limits for implicit solves.

    ``tol`` bounds the infinity norm of the residual.  ``fd_epsilon`` is the
    forward-difference step of the Jacobian, scaled by ``max(1, |x_j|)``.
    ``method`` is ``"newton"`` or ``"fixed_point"`` (iteration with the
    Jacobian frozen at the initial guess); ``damping`` is ``"none"`` or
    ``"halving"`` (backtrack until the residual norm decreases).
    """

    tol: float = 1e-12
    max_iter: int = 50
    fd_epsilon: float = 1e-7
    method: str = "newton"
    damping: str = "halving"

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise DomainError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.fd_epsilon > 0:
            raise DomainError(f"fd_epsilon must be positive, got {self.fd_epsilon}")
        if self.method not in ("newton", "fixed_point"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.damping not in ("none", "halving"):
            raise DomainError(f"unknown damping {self.damping!r}")


DEFAULT_CONFIG = SolverConfig()


def fd_jacobian(residual, x, r0, eps):
    """Forward-difference Jacobian of ``residual`` at ``x`` given ``r0 = residual(x)``."""
    n = x.shape[0]
    jac = np.empty((r0.shape[0], n))
    for j in range(n):
        step = eps * max(1.0, abs(x[j]))
        xp = x.copy()
        xp[j] += step
        jac[:, j] = (residual(xp) - r0) / (xp[j] - x[j])
    return jac


def _solve_linear(jac, r, x, it, rnorm):
    try:
        dx = np.linalg.solve(jac, r)
    except np.linalg.LinAlgError:
        raise ConditioningError(
            f"singular Jacobian at iteration {it} (residual {rnorm:.3e})", it, rnorm, x
        ) from None
    if not np.all(np.isfinite(dx)):
        raise ConditioningError(f"non-finite Newton update at iteration {it}", it, rnorm, x)
    return dx


def solve_root(residual, guess, cfg=DEFAULT_CONFIG, stats=None, jacobian=None):
    """Find ``x`` with ``max|residual(x)| <= cfg.tol``.

    Parameters
    ----------
    residual : callable
        Maps a 1-D array to a 1-D array of the same length.  Must be pure.
    guess : array_like
        Starting point.
    cfg : SolverConfig
    stats : dict, optional
        If given, ``"iterations"`` and ``"residual_norm"`` are written to it.
    jacobian : callable, optional
        Analytic Jacobian ``x -> (n, n)``; forward differences otherwise.

    Raises
    ------
    ConvergenceError
        ``max_iter`` exceeded or the residual became non-finite.
    ConditioningError
        The Jacobian could not be factorised.
    """
    x = np.array(guess, dtype=float, ndmin=1)
    if not np.all(np.isfinite(x)):
        raise DomainError("initial guess must be finite")
    r = np.asarray(residual(x), dtype=float)
    rnorm = np.max(np.abs(r))
    frozen = None
    it = 0
    while rnorm > cfg.tol:
        if it >= cfg.max_iter:
            raise ConvergenceError(
                f"no convergence after {it} iterations (residual {rnorm:.3e} > tol {cfg.tol:.1e})",
                it, rnorm, x,
            )
        if not np.isfinite(rnorm):
            raise ConvergenceError(f"residual became non-finite at iteration {it}", it, rnorm, x)
        it += 1
        if cfg.method == "newton" or frozen is None:
            if jacobian is not None:
                jac = np.atleast_2d(np.asarray(jacobian(x), dtype=float))
            else:
                jac = fd_jacobian(residual, x, r, cfg.fd_epsilon)
            frozen = jac
        jac = frozen
        dx = _solve_linear(jac, r, x, it, rnorm)

        alpha = 1.0
        while True:
            x_new = x - alpha * dx
            r_new = np.asarray(residual(x_new), dtype=float)
            rnorm_new = np.max(np.abs(r_new))
            if cfg.damping == "none" or rnorm_new < rnorm or alpha < 2.0**-20:
                break
            # a full step that cannot move x any more is at the rounding floor
            if np.max(np.abs(alpha * dx)) <= 4 * _EPS * max(1.0, np.max(np.abs(x))):
                break
            alpha /= 2
        x, r, rnorm = x_new, r_new, rnorm_new

    if stats is not None:
        stats["iterations"] = it
        stats["residual_norm"] = float(rnorm)
    return x
