"""Free-space resonant dipole-dipole coupling."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularPairError
from .geometry import K, EnsembleGeometry

DEFAULT_MIN_SEPARATION = 1e-3


def _green(xi, cos2, gamma):
    return (0.75 * gamma) * np.exp(1j * xi) * (
        (1.0 - cos2) * (1j / xi) - (1.0 - 3.0 * cos2) * (1.0 / xi**2 + 1j / xi**3)
    )


def pair_green(separation, dipole_orientation=(1.0, 0.0, 0.0), gamma: float = 1.0) -> complex:
    """Coupling G for one pair; real part is (minus) the collective decay,
    imaginary part the collective shift."""
    s = np.asarray(separation, dtype=float).reshape(3)
    r = float(np.linalg.norm(s))
    if r == 0.0:
        raise SingularPairError("zero separation has no pair coupling")
    cos = float(np.dot(np.asarray(dipole_orientation, dtype=float), s)) / r
    return complex(_green(K * r, cos * cos, gamma))


@dataclass(frozen=True)
class InteractionMatrix:
    entries: np.ndarray
    detuning: float
    gamma: float = 1.0

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def off_diagonal(self) -> np.ndarray:
        g = self.entries.copy()
        np.fill_diagonal(g, 0.0)
        return g

    def with_detuning(self, detuning: float) -> "InteractionMatrix":
        g = self.entries.copy()
        np.fill_diagonal(g, 1j * detuning - 0.5 * self.gamma)
        g.setflags(write=False)
        return InteractionMatrix(g, float(detuning), self.gamma)

    def dump(self, path) -> None:
        n = self.size
        mu, nu = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        table = np.column_stack([mu.ravel(), nu.ravel(), self.entries.real.ravel(), self.entries.imag.ravel()])
        np.savetxt(path, table, fmt=["%d", "%d", "%.17g", "%.17g"], header="mu nu re_G im_G")


def build_interaction_matrix(
    geometry: EnsembleGeometry, detuning: float = 0.0, min_separation: float = DEFAULT_MIN_SEPARATION
) -> InteractionMatrix:
    pos = geometry.positions
    n = geometry.atom_count
    g = np.zeros((n, n), dtype=complex)
    if n > 1:
        iu, ju = np.triu_indices(n, 1)
        s = pos[iu] - pos[ju]
        r = np.linalg.norm(s, axis=1)
        bad = np.flatnonzero(r < min_separation)
        if bad.size:
            a, b = int(iu[bad[0]]), int(ju[bad[0]])
            raise SingularPairError(
                f"atoms {a} and {b} are {r[bad[0]]:.3g} apart, below the minimum {min_separation:g}",
                indices=(a, b),
            )
        cos = (s @ geometry.dipole_orientation) / r
        vals = _green(K * r, cos * cos, geometry.gamma)
        g[iu, ju] = vals
        g[ju, iu] = vals
    np.fill_diagonal(g, 1j * detuning - 0.5 * geometry.gamma)
    g.setflags(write=False)
    return InteractionMatrix(g, float(detuning), geometry.gamma)
