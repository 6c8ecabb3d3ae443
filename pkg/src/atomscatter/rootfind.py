"""Newton and Broyden root finders on flat real vectors."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass
class SolveReport:
    root: np.ndarray
    iterations: int
    final_residual_norm: float
    converged: bool
    method: str
    history: list = field(default_factory=list)
    message: str = ""

    def diagnostics(self):
        """(iteration, residual-norm) rows."""
        return list(enumerate(self.history))


def fd_jacobian(fun, x):
    """Central differences with step 1e-6 * (1 + |x_i|)."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        h = 1e-6 * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(fun(xp)) - np.asarray(fun(xm))) / (2.0 * h))
    return np.column_stack(cols) if cols else np.zeros((0, 0))


def _norm(f):
    return float(np.max(np.abs(f))) if f.size else 0.0


def newton_solve(residual_fn, x0, tol=DEFAULT_TOL, max_iter=50, jac=None) -> SolveReport:
    x = np.array(x0, dtype=float)
    f = np.asarray(residual_fn(x), dtype=float)
    fn = _norm(f)
    best = (fn, x.copy())
    history = [fn]
    it = 0
    while fn >= tol and it < max_iter:
        it += 1
        j = jac(x) if jac is not None else fd_jacobian(residual_fn, x)
        try:
            step = np.linalg.solve(j, f)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError("non-finite step")
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(j, f, rcond=None)[0]
        # halve the step until the residual drops; keep the last try otherwise
        lam = 1.0
        for _ in range(21):
            xn = x - lam * step
            fnew = np.asarray(residual_fn(xn), dtype=float)
            nn = _norm(fnew)
            if np.isfinite(nn) and nn < fn:
                break
            lam *= 0.5
        x, f, fn = xn, fnew, nn
        history.append(fn)
        if np.isfinite(fn) and fn < best[0]:
            best = (fn, x.copy())
    converged = best[0] < tol
    msg = "" if converged else f"no convergence in {max_iter} iterations"
    return SolveReport(best[1], it, best[0], converged, "newton", history, msg)


def broyden_solve(residual_fn, x0, j0inv=None, tol=DEFAULT_TOL, max_iter=200, jac=None,
                  max_restarts=3, growth_limit=10) -> SolveReport:
    """Broyden iteration with the rank-one inverse update
    J^-1 += (s - J^-1 y) y^T / |y|^2.

    ``j0inv`` may be a matrix, ``"fd"`` (inverse finite-difference Jacobian,
    the default), ``"identity"`` (-I scaled by the residual size) or None.
    ``jac`` supplies an exact Jacobian for the initial inverse and restarts.
    """
    x = np.array(x0, dtype=float)
    f = np.asarray(residual_fn(x), dtype=float)

    def fresh_inverse(xc):
        j = jac(xc) if jac is not None else fd_jacobian(residual_fn, xc)
        try:
            return np.linalg.inv(j)
        except np.linalg.LinAlgError:
            return np.linalg.pinv(j)

    if j0inv is None or (isinstance(j0inv, str) and j0inv == "fd"):
        jinv = fresh_inverse(x)
    elif isinstance(j0inv, str) and j0inv == "identity":
        jinv = -np.eye(x.size)
    else:
        jinv = np.array(j0inv, dtype=float)

    fn = _norm(f)
    best = (fn, x.copy())
    history = [fn]
    growth = 0
    restarts = 0
    it = 0
    message = ""
    while fn >= tol and it < max_iter:
        it += 1
        xn = x - jinv @ f
        fnew = np.asarray(residual_fn(xn), dtype=float)
        nn = _norm(fnew)
        if not np.isfinite(nn):
            growth = growth_limit
        else:
            s = xn - x
            y = fnew - f
            yy = float(y @ y)
            if np.sqrt(yy) < 1e-14:
                x, f, fn = xn, fnew, nn
                history.append(fn)
                if fn < best[0]:
                    best = (fn, x.copy())
                if fn >= tol:
                    message = "stagnation: |y| below 1e-14"
                break
            jinv = jinv + np.outer(s - jinv @ y, y) / yy
            growth = growth + 1 if nn > fn else 0
            x, f, fn = xn, fnew, nn
            history.append(fn)
            if fn < best[0]:
                best = (fn, x.copy())
        if growth >= growth_limit:
            if restarts >= max_restarts:
                message = f"diverged after {max_restarts} restarts"
                break
            restarts += 1
            log.debug("broyden restart %d from best iterate (|F| = %.3g)", restarts, best[0])
            x = best[1].copy()
            f = np.asarray(residual_fn(x), dtype=float)
            fn = _norm(f)
            jinv = fresh_inverse(x)
            growth = 0
    converged = best[0] < tol
    if not converged and not message:
        message = f"no convergence in {max_iter} iterations"
    return SolveReport(best[1], it, best[0], converged, "broyden", history, message)


def continuation_initial_guess(previous_root, new_parameters=None):
    """Warm start for the next scan point: the previous root itself."""
    return np.array(previous_root, dtype=float)
