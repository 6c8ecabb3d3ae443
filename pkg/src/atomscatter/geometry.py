"""Atom positions and the driving beam.

Units throughout: lengths in wavelengths, rates in the single-atom decay
rate, so k = 2*pi.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, SamplingExhaustedError

K = 2.0 * np.pi
DEFAULT_MIN_SEPARATION = 0.05


@dataclass(frozen=True)
class EnsembleGeometry:
    positions: np.ndarray
    dipole_orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))
    gamma: float = 1.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float).reshape(-1, 3)
        d = np.array(self.dipole_orientation, dtype=float).reshape(3)
        if pos.shape[0] < 1:
            raise InvalidArgumentError("geometry needs at least one atom")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise InvalidArgumentError("dipole_orientation must have unit norm")
        if not self.gamma > 0:
            raise InvalidArgumentError("gamma must be positive")
        pos.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "dipole_orientation", d)

    @property
    def atom_count(self) -> int:
        return self.positions.shape[0]

    def min_pair_distance(self) -> float:
        if self.atom_count < 2:
            return np.inf
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        dist = np.linalg.norm(diff, axis=-1)
        iu = np.triu_indices(self.atom_count, 1)
        return float(dist[iu].min())


@dataclass(frozen=True)
class DriveConfig:
    omega0: float = 0.1
    waist: float = 2.5
    detuning: float = 0.0

    def __post_init__(self):
        if not self.waist > 0:
            raise InvalidArgumentError("waist must be positive")
        if not self.omega0 >= 0:
            raise InvalidArgumentError("omega0 must be non-negative")

    @property
    def k(self) -> float:
        return K

    def with_detuning(self, detuning: float) -> "DriveConfig":
        return DriveConfig(self.omega0, self.waist, float(detuning))

    def with_omega0(self, omega0: float) -> "DriveConfig":
        return DriveConfig(float(omega0), self.waist, self.detuning)


def build_rect_lattice(nx: int, ny: int, ax: float, ay: float) -> EnsembleGeometry:
    """nx*ny atoms in the z = 0 plane, centred on the beam axis."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise InvalidArgumentError(f"lattice counts must be positive integers, got ({nx}, {ny})")
    if not (ax > 0 and ay > 0):
        raise InvalidArgumentError(f"lattice spacings must be positive, got ({ax}, {ay})")
    i, j = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    x = (i.ravel() - (nx - 1) / 2.0) * ax
    y = (j.ravel() - (ny - 1) / 2.0) * ay
    return EnsembleGeometry(np.column_stack([x, y, np.zeros_like(x)]))


def sample_gaussian_cloud(n, rms, seed, min_separation=DEFAULT_MIN_SEPARATION, max_redraws=10_000):
    """Independent normal draws per axis; atoms closer than `min_separation`
    to an accepted atom are redrawn."""
    rms = np.asarray(rms, dtype=float).reshape(3)
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    if np.any(rms <= 0):
        raise InvalidArgumentError("rms widths must be positive")
    if min_separation < 0:
        raise InvalidArgumentError("min_separation must be non-negative")
    rng = np.random.default_rng(seed)
    if min_separation == 0:
        return EnsembleGeometry(rng.normal(0.0, rms, size=(int(n), 3)))
    accepted = np.empty((int(n), 3))
    count = 0
    redraws = 0
    while count < n:
        p = rng.normal(0.0, rms)
        if count and np.min(np.linalg.norm(accepted[:count] - p, axis=1)) < min_separation:
            redraws += 1
            if redraws > max_redraws:
                raise SamplingExhaustedError(
                    f"placed {count} of {n} atoms before exhausting {max_redraws} redraws"
                )
            continue
        accepted[count] = p
        count += 1
    return EnsembleGeometry(accepted)


def beam_profile(position, waist: float):
    """Transverse Gaussian amplitude exp(-(x^2 + y^2)/w0^2), 1 on axis."""
    if not waist > 0:
        raise InvalidArgumentError("waist must be positive")
    p = np.asarray(position, dtype=float)
    rho2 = p[..., 0] ** 2 + p[..., 1] ** 2
    return np.exp(-rho2 / waist**2)


def rabi_frequencies(geometry: EnsembleGeometry, drive: DriveConfig) -> np.ndarray:
    return drive.omega0 * beam_profile(geometry.positions, drive.waist)


def rabi_at(geometry: EnsembleGeometry, drive: DriveConfig, atom_index: int) -> float:
    if not 0 <= atom_index < geometry.atom_count:
        raise InvalidArgumentError(f"atom index {atom_index} out of range for {geometry.atom_count} atoms")
    return float(drive.omega0 * beam_profile(geometry.positions[atom_index], drive.waist))


def drive_phases(geometry: EnsembleGeometry) -> np.ndarray:
    """exp(+ikz) per atom: the phase that multiplies sigma^dagger in the drive."""
    return np.exp(1j * K * geometry.positions[:, 2])


def save_geometry(path, geometry: EnsembleGeometry) -> None:
    np.savetxt(path, geometry.positions, fmt="%.17g", header="x y z (wavelengths)")


def load_geometry(path) -> EnsembleGeometry:
    return EnsembleGeometry(np.loadtxt(path, ndmin=2))
