"""Full density-matrix steady state of the driven, coupled atoms.

Vectorisation is row-major: vec(A rho B) = kron(A, B.T) @ rho.ravel().
Local basis per atom is (|g>, |e>), atom 0 is the most significant factor.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

from .errors import CapacityError, InvalidArgumentError, NonUniqueSteadyStateError
from .geometry import DriveConfig, EnsembleGeometry, drive_phases, rabi_frequencies
from .kernel import InteractionMatrix, build_interaction_matrix

DEFAULT_CAP = 8
RESIDUAL_TOL = 1e-10
DENSE_LIMIT = 1024

LOCAL = {
    "s": np.array([[0.0, 1.0], [0.0, 0.0]]),
    "d": np.array([[0.0, 0.0], [1.0, 0.0]]),
    "e": np.array([[0.0, 0.0], [0.0, 1.0]]),
}


@lru_cache(maxsize=64)
def local_operator(n_atoms: int, atom: int, op: str) -> sp.csr_matrix:
    """`op` on `atom` embedded in the n-atom Hilbert space."""
    left = sp.identity(2**atom, format="csr")
    right = sp.identity(2 ** (n_atoms - atom - 1), format="csr")
    return sp.kron(sp.kron(left, LOCAL[op]), right, format="csr")


def build_liouvillian(geometry: EnsembleGeometry, drive: DriveConfig, interaction: InteractionMatrix | None = None,
                      cap: int = DEFAULT_CAP) -> sp.csr_matrix:
    n = geometry.atom_count
    if n > cap:
        raise CapacityError(f"exact solver handles at most {cap} atoms, got {n}")
    if interaction is None:
        interaction = build_interaction_matrix(geometry, drive.detuning)
    g = np.asarray(interaction.entries)
    dim = 2**n
    sig = [local_operator(n, m, "s") for m in range(n)]
    sigd = [local_operator(n, m, "d") for m in range(n)]
    rabi = rabi_frequencies(geometry, drive)
    phase = drive_phases(geometry)

    h = sp.csr_matrix((dim, dim), dtype=complex)
    for m in range(n):
        h = h - 0.5 * rabi[m] * (np.conj(phase[m]) * sig[m] + phase[m] * sigd[m])
    # K = sum_{mu,nu} G_{mu nu} sigma_mu^+ sigma_nu
    k_op = sp.csr_matrix((dim, dim), dtype=complex)
    for m in range(n):
        row = sp.csr_matrix((dim, dim), dtype=complex)
        for v in range(n):
            row = row + g[m, v] * sig[v]
        k_op = k_op + sigd[m] @ row
    eye = sp.identity(dim, format="csr")
    lv = -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    lv = lv + sp.kron(k_op, eye) + sp.kron(eye, k_op.conj())
    # jump part, coefficient G_{mu nu} + G*_{nu mu}
    c = g + g.conj().T
    for m in range(n):
        for v in range(n):
            if c[m, v] != 0:
                lv = lv - c[m, v] * sp.kron(sig[v], sig[m])
    return sp.csr_matrix(lv)


@lru_cache(maxsize=16)
def detuning_generator(n_atoms: int) -> sp.csr_matrix:
    """D with L(delta) = L(0) + delta * D: detuning only enters G_mumu."""
    dim = 2**n_atoms
    exc = sp.csr_matrix((dim, dim))
    for m in range(n_atoms):
        exc = exc + local_operator(n_atoms, m, "e")
    eye = sp.identity(dim, format="csr")
    return sp.csr_matrix(1j * (sp.kron(exc, eye) - sp.kron(eye, exc)))


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T)))

    @property
    def trace_error(self) -> float:
        return float(abs(np.trace(self.entries) - 1.0))

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.entries + self.entries.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])


@dataclass
class ExactSolution:
    rho: DensityMatrix
    n_atoms: int
    residual: float
    method: str

    def __post_init__(self):
        self._cache = {}

    def moment(self, key) -> complex:
        """Expectation of a product of single-atom operators on distinct atoms,
        `key` being a sequence of (atom, op) with op in {'s', 'd', 'e'}."""
        key = tuple(sorted(key))
        if not key:
            return complex(np.trace(self.rho.entries))
        if key not in self._cache:
            op = sp.identity(2**self.n_atoms, format="csr")
            for atom, name in key:
                op = op @ local_operator(self.n_atoms, atom, name)
            self._cache[key] = complex(op.multiply(self.rho.entries.T).sum())
        return self._cache[key]

    @property
    def sigma(self) -> np.ndarray:
        return np.array([self.moment(((m, "s"),)) for m in range(self.n_atoms)])

    @property
    def excited(self) -> np.ndarray:
        return np.array([self.moment(((m, "e"),)).real for m in range(self.n_atoms)])


def _trace_constrained(lv: sp.csr_matrix, dim: int):
    """L with the rho_00 equation (redundant by trace preservation) replaced
    by Tr(rho) = 1. It is singular exactly when the null space of L is
    degenerate."""
    d2 = dim * dim
    a = lv.tolil(copy=True)
    a[0, :] = sp.identity(dim, format="csr").reshape(1, d2)
    b = np.zeros(d2, dtype=complex)
    b[0] = 1.0
    return sp.csr_matrix(a), b


def _normalise(vec: np.ndarray, dim: int) -> np.ndarray:
    rho = vec.reshape(dim, dim)
    return rho / np.trace(rho)


def _integrate(lv: sp.csr_matrix, dim: int, rho: np.ndarray | None = None, chunk: float = 50.0,
               max_time: float = 1e5) -> np.ndarray:
    if rho is None:
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
    vec = rho.ravel().astype(complex)
    t = 0.0
    while t < max_time:
        vec = spla.expm_multiply(lv * chunk, vec)
        t += chunk
        vec = vec / np.trace(vec.reshape(dim, dim))
        if np.max(np.abs(lv @ vec)) < RESIDUAL_TOL:
            break
    return vec.reshape(dim, dim)


def steady_state(liouvillian, n_atoms: int | None = None, rcond_limit: float = 1e-13) -> ExactSolution:
    """Trace-one null vector of L; long-time integration from the all-ground
    state if that vector misses the residual tolerance."""
    lv = sp.csr_matrix(liouvillian)
    d2 = lv.shape[0]
    dim = int(round(np.sqrt(d2)))
    if n_atoms is None:
        n_atoms = int(round(np.log2(dim)))
    a, b = _trace_constrained(lv, dim)
    if d2 <= DENSE_LIMIT:
        dense = a.toarray()
        lu = sla.lu_factor(dense)
        rcond, _ = lapack.zgecon(lu[0], np.max(np.sum(np.abs(dense), axis=0)), norm="1")
        if rcond < rcond_limit:
            raise NonUniqueSteadyStateError(f"steady state is not unique (reciprocal condition {rcond:.3g})")
        solve = lambda rhs: sla.lu_solve(lu, rhs)
    else:
        try:
            lu = spla.splu(sp.csc_matrix(a))
        except RuntimeError as exc:
            raise NonUniqueSteadyStateError(f"steady state is not unique: {exc}") from exc
        solve = lu.solve
    vec = solve(b)
    for _ in range(2):
        vec = vec + solve(b - a @ vec)
    rho = _normalise(vec, dim)
    method = "nullspace"
    res = float(np.max(np.abs(lv @ rho.ravel())))
    if not np.isfinite(res) or res >= RESIDUAL_TOL:
        rho = _integrate(lv, dim, rho if np.all(np.isfinite(rho)) else None)
        res = float(np.max(np.abs(lv @ rho.ravel())))
        method = "integration"
    return ExactSolution(DensityMatrix(rho), n_atoms, res, method)


def solve_exact(geometry: EnsembleGeometry, drive: DriveConfig, interaction: InteractionMatrix | None = None,
                cap: int = DEFAULT_CAP) -> ExactSolution:
    lv = build_liouvillian(geometry, drive, interaction, cap=cap)
    return steady_state(lv, geometry.atom_count)


_TOKEN = re.compile(r"^(sd|s|e)(\d+)$")


def expectations(solution: ExactSolution, operator_string: str) -> complex:
    """Tr(rho * A1 * A2 * ...) for a product written like ``"sd0*s1"``.

    Tokens: ``s<i>`` lowering, ``sd<i>`` raising, ``e<i>`` excited-state
    projector; ``1`` or an empty string is the identity.
    """
    text = operator_string.strip()
    n = solution.n_atoms
    op = sp.identity(2**n, format="csr", dtype=complex)
    if text not in ("", "1"):
        for tok in re.split(r"[\s*]+", text):
            m = _TOKEN.match(tok)
            if m is None:
                raise InvalidArgumentError(f"malformed operator token {tok!r} in {operator_string!r}")
            name, atom = m.group(1), int(m.group(2))
            if atom >= n:
                raise InvalidArgumentError(f"atom index {atom} out of range for {n} atoms")
            op = op @ local_operator(n, atom, "d" if name == "sd" else name)
    return complex(op.multiply(solution.rho.entries.T).sum())
