"""Steady-state light scattering of laser-driven two-level atoms coupled by
free-space dipole-dipole interactions."""

from .cumulants import BasisIndex, MomentState, enumerate_basis, residual_order1, residual_order2
from .errors import *  # noqa: F401,F403
from .exact import build_liouvillian, expectations, solve_exact, steady_state
from .geometry import (
    DriveConfig,
    EnsembleGeometry,
    beam_profile,
    build_rect_lattice,
    rabi_at,
    sample_gaussian_cloud,
)
from .kernel import InteractionMatrix, build_interaction_matrix, pair_green
from .linear import solve_linear
from .observables import (
    LorentzParams,
    SpectrumResult,
    fit_lorentzian,
    max_relative_error,
    optical_depth,
    scan_spectrum,
    transmission,
)
from .rootfind import SolveReport, broyden_solve, continuation_initial_guess, newton_solve
from .solvers import SOLVERS, Model, solve_point

__version__ = "0.1.0"
