"""Weak-field model: N coupled linear equations G sigma = -(i/2) Omega e^{ikz}."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import IllConditionedError
from .geometry import DriveConfig, EnsembleGeometry, drive_phases, rabi_frequencies
from .kernel import InteractionMatrix

COND_LIMIT = 1e10


def condition_estimate(lu_piv, anorm) -> float:
    rcond, info = lapack.zgecon(lu_piv[0], anorm, norm="1")
    if info != 0 or rcond == 0:
        return np.inf
    return 1.0 / rcond


def solve_linear(interaction: InteractionMatrix, geometry: EnsembleGeometry, drive: DriveConfig,
                 cond_limit: float = COND_LIMIT) -> np.ndarray:
    g = np.asarray(interaction.entries, dtype=complex)
    rhs = -0.5j * rabi_frequencies(geometry, drive) * drive_phases(geometry)
    anorm = np.max(np.sum(np.abs(g), axis=0))
    lu = sla.lu_factor(g, check_finite=True)
    cond = condition_estimate(lu, anorm)
    if cond > cond_limit:
        raise IllConditionedError(f"interaction matrix condition estimate {cond:.3g} exceeds {cond_limit:.3g}",
                                  condition=cond)
    return sla.lu_solve(lu, rhs)
