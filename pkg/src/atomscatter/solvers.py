"""Steady-state dipoles at each fidelity level behind one interface."""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .cumulants import (
    MomentState,
    coefficient_vector,
    compiled_equations,
    enumerate_basis,
    mean_field_jacobian,
    mean_field_residual,
)
from .errors import CapacityError, InvalidArgumentError
from .exact import DEFAULT_CAP, ExactSolution, build_liouvillian, detuning_generator, steady_state
from .geometry import DriveConfig, EnsembleGeometry, drive_phases, rabi_frequencies
from .kernel import build_interaction_matrix
from .linear import solve_linear
from .rootfind import DEFAULT_TOL, broyden_solve, newton_solve

log = logging.getLogger(__name__)

SOLVERS = ("exact", "linear", "cumulant1", "cumulant2")


@dataclass
class PointResult:
    sigma: np.ndarray
    converged: bool
    iterations: int = 0
    residual: float = 0.0
    root: np.ndarray | None = None
    exact: ExactSolution | None = None


def check_capacity(solver: str, n_atoms: int, exact_cap: int = DEFAULT_CAP) -> None:
    if solver not in SOLVERS:
        raise InvalidArgumentError(f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    if solver == "exact" and n_atoms > exact_cap:
        raise CapacityError(f"exact solver handles at most {exact_cap} atoms, got {n_atoms}")


def linear_initial_guess(sigma_lin, order):
    """Moment vector built from weak-field dipoles: populations |sigma|^2
    (capped at 1/2), pair moments as products."""
    sigma_lin = np.asarray(sigma_lin, dtype=complex)
    exc = np.minimum(np.abs(sigma_lin) ** 2, 0.5)
    return MomentState.factorized(order, sigma_lin, exc).pack()


class Model:
    """One geometry and drive solved at a chosen fidelity level.

    The off-diagonal coupling is assembled once; detuning and drive strength
    may change per call. The last cumulant root is kept for warm starts.
    """

    def __init__(self, geometry: EnsembleGeometry, drive: DriveConfig, solver: str, tol: float = DEFAULT_TOL,
                 max_iter: int | None = None, exact_cap: int = DEFAULT_CAP, jacobian: str = "analytic",
                 kernel_min_separation: float = 1e-3):
        check_capacity(solver, geometry.atom_count, exact_cap)
        if jacobian not in ("analytic", "fd"):
            raise InvalidArgumentError("jacobian must be 'analytic' or 'fd'")
        self.geometry = geometry
        self.drive = drive
        self.solver = solver
        self.tol = tol
        self.max_iter = max_iter
        self.exact_cap = exact_cap
        self.jacobian = jacobian
        self.interaction = build_interaction_matrix(geometry, drive.detuning, min_separation=kernel_min_separation)
        self.last_root = None
        self._base = None
        if solver == "cumulant2":
            self.equations = compiled_equations(geometry.atom_count, 2)

    @property
    def order(self):
        return {"cumulant1": 1, "cumulant2": 2}.get(self.solver)

    def _drive(self, detuning, omega0):
        d = self.drive
        if detuning is not None:
            d = d.with_detuning(detuning)
        if omega0 is not None:
            d = d.with_omega0(omega0)
        return d

    def system(self, drive: DriveConfig):
        """(residual, jacobian, size) of the cumulant system for ``drive``."""
        g = self.interaction.with_detuning(drive.detuning)
        if self.order == 1:
            gm = np.asarray(g.entries)
            h = rabi_frequencies(self.geometry, drive) * drive_phases(self.geometry)
            return (lambda x: mean_field_residual(x, gm, h)), (lambda x: mean_field_jacobian(x, gm, h))
        p = coefficient_vector(g, self.geometry, drive)
        eqs = self.equations
        return (lambda x: eqs.residual(x, p)), (lambda x: eqs.jacobian(x, p))

    def cold_guess(self, drive):
        if drive.omega0 == 0:
            return np.zeros(enumerate_basis(self.geometry.atom_count, self.order).size)
        g = self.interaction.with_detuning(drive.detuning)
        return linear_initial_guess(solve_linear(g, self.geometry, drive), self.order)

    def _root(self, drive, x0):
        res, jac = self.system(drive)
        jac = jac if self.jacobian == "analytic" else None
        if self.order == 1:
            return newton_solve(res, x0, tol=self.tol, max_iter=self.max_iter or 50, jac=jac)
        return broyden_solve(res, x0, tol=self.tol, max_iter=self.max_iter or 200, jac=jac)

    def solve(self, detuning=None, omega0=None, x0=None, warm=True) -> PointResult:
        drive = self._drive(detuning, omega0)
        n = self.geometry.atom_count
        if self.solver == "exact":
            if self._base is None or self._base[0] != drive.omega0:
                zero = self.interaction.with_detuning(0.0)
                self._base = (drive.omega0, build_liouvillian(self.geometry, drive, zero, self.exact_cap))
            lv = self._base[1] + drive.detuning * detuning_generator(n)
            sol = steady_state(lv, n)
            return PointResult(sol.sigma, sol.residual < 1e-10, 0, sol.residual, exact=sol)
        if self.solver == "linear":
            g = self.interaction.with_detuning(drive.detuning)
            return PointResult(solve_linear(g, self.geometry, drive), True)
        if drive.omega0 == 0:
            x = np.zeros(enumerate_basis(n, self.order).size)
            return PointResult(np.zeros(n, dtype=complex), True, root=x)
        if x0 is None:
            x0 = self.last_root if (warm and self.last_root is not None) else self.cold_guess(drive)
        rep = self._root(drive, x0)
        if not rep.converged:
            log.info("%s: direct solve failed at detuning %.3g (|F| = %.3g); ramping intensity",
                     self.solver, drive.detuning, rep.final_residual_norm)
            rep = self._ramp(drive)
        self.last_root = rep.root if rep.converged else self.last_root
        state = MomentState.unpack(self.order, n, rep.root)
        return PointResult(state.sigma, rep.converged, rep.iterations, rep.final_residual_norm, root=rep.root)

    def _ramp(self, drive, steps=12):
        """Intensity continuation from 1e-3 of the target drive."""
        x = None
        rep = None
        for om in np.geomspace(1e-3 * drive.omega0, drive.omega0, steps):
            d = drive.with_omega0(om)
            start = self.cold_guess(d) if x is None else x
            rep = self._root(d, start)
            if not rep.converged:
                return rep
            x = rep.root
        return rep


def solve_point(geometry, drive, solver, **options) -> PointResult:
    return Model(geometry, drive, solver, **options).solve()


def moments(geometry, drive, solver, **options) -> MomentState:
    """Moment state of a cumulant solve (convenience for inspection)."""
    model = Model(geometry, drive, solver, **options)
    res = model.solve()
    return MomentState.unpack(model.order, geometry.atom_count, res.root)
