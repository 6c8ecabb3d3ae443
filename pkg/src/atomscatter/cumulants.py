"""Closed steady-state moment equations at first and second cumulant order.

Unknowns are packed into a flat real vector: every complex moment becomes
(re, im) and every Hermitian moment (<e_mu>, <e_mu e_nu>) a single real.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import InvalidArgumentError
from .geometry import DriveConfig, EnsembleGeometry, drive_phases, rabi_frequencies
from .kernel import InteractionMatrix
from .operators import ParamLayout, adjoint, heisenberg_terms

FAMILIES = ("sigma", "excited", "sig_sig", "sigd_sig", "sig_e", "e_e")
IMAG_TOL = 1e-10


class BasisIndex:
    """Bijection between stored moments and the flat real unknown vector."""

    def __init__(self, n_atoms: int, order: int):
        if n_atoms < 1:
            raise InvalidArgumentError("n_atoms must be >= 1")
        if order not in (1, 2):
            raise InvalidArgumentError(f"order must be 1 or 2, got {order}")
        self.n_atoms = n = n_atoms
        self.order = order
        self.pairs = list(combinations(range(n), 2))
        self.ordered_pairs = [(m, v) for m in range(n) for v in range(n) if m != v]
        fam = {
            "sigma": [((m, "s"),) for m in range(n)],
            "excited": [((m, "e"),) for m in range(n)],
        }
        if order == 2:
            fam["sig_sig"] = [((m, "s"), (v, "s")) for m, v in self.pairs]
            fam["sigd_sig"] = [((m, "d"), (v, "s")) for m, v in self.pairs]
            fam["sig_e"] = [tuple(sorted(((m, "s"), (v, "e")))) for m, v in self.ordered_pairs]
            fam["e_e"] = [((m, "e"), (v, "e")) for m, v in self.pairs]
        self.keys = []
        self.family_slices = {}
        for name in FAMILIES:
            ks = fam.get(name, [])
            self.family_slices[name] = slice(len(self.keys), len(self.keys) + len(ks))
            self.keys.extend(ks)
        self.slot_of = {k: i for i, k in enumerate(self.keys)}
        self.is_real = np.array([all(op == "e" for _, op in k) for k in self.keys])

        re_idx, im_idx = [], []
        pos = 0
        for real in self.is_real:
            re_idx.append(pos)
            im_idx.append(-1 if real else pos + 1)
            pos += 1 if real else 2
        self.size = pos
        self.re_idx = np.array(re_idx)
        self.im_idx = np.array(im_idx)
        self.complex_slots = np.flatnonzero(~self.is_real)
        # flat position -> (slot, is imaginary part)
        self.flat_slot = np.empty(pos, dtype=int)
        self.flat_is_im = np.zeros(pos, dtype=bool)
        self.flat_slot[self.re_idx] = np.arange(len(self.keys))
        cs = self.complex_slots
        self.flat_slot[self.im_idx[cs]] = cs
        self.flat_is_im[self.im_idx[cs]] = True

    @property
    def n_slots(self) -> int:
        return len(self.keys)

    def resolve(self, key):
        """(slot, conjugated) for a stored moment or its conjugate, else None."""
        key = tuple(sorted(key))
        if key in self.slot_of:
            return self.slot_of[key], False
        adj = tuple(sorted(adjoint(key)))
        if adj in self.slot_of:
            return self.slot_of[adj], True
        return None

    def to_complex(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = x[self.re_idx].astype(complex)
        cs = self.complex_slots
        v[cs] += 1j * x[self.im_idx[cs]]
        return v

    def to_flat(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=complex)
        return np.where(self.flat_is_im, v[self.flat_slot].imag, v[self.flat_slot].real)


def enumerate_basis(n_atoms: int, order: int) -> BasisIndex:
    return _basis(n_atoms, order)


@lru_cache(maxsize=32)
def _basis(n_atoms, order):
    return BasisIndex(n_atoms, order)


@dataclass
class MomentState:
    order: int
    sigma: np.ndarray
    excited: np.ndarray
    sig_sig: np.ndarray | None = None
    sigd_sig: np.ndarray | None = None
    sig_e: np.ndarray | None = None
    e_e: np.ndarray | None = None

    @property
    def n_atoms(self) -> int:
        return len(self.sigma)

    @property
    def basis(self) -> BasisIndex:
        return enumerate_basis(self.n_atoms, self.order)

    def slots(self) -> np.ndarray:
        b = self.basis
        v = np.zeros(b.n_slots, dtype=complex)
        for name in FAMILIES:
            val = getattr(self, name)
            sl = b.family_slices[name]
            if sl.stop > sl.start:
                v[sl] = val
        return v

    def pack(self) -> np.ndarray:
        return self.basis.to_flat(self.slots())

    @classmethod
    def from_slots(cls, order, n_atoms, v):
        b = enumerate_basis(n_atoms, order)
        kw = {}
        for name in FAMILIES:
            sl = b.family_slices[name]
            if sl.stop > sl.start:
                part = np.array(v[sl])
                kw[name] = part.real.copy() if name in ("excited", "e_e") else part
        return cls(order=order, **kw)

    @classmethod
    def unpack(cls, order, n_atoms, x):
        return cls.from_slots(order, n_atoms, enumerate_basis(n_atoms, order).to_complex(x))

    @classmethod
    def factorized(cls, order, sigma, excited):
        """Moment state with every pair moment set to the product of its
        single-atom factors."""
        sigma = np.asarray(sigma, dtype=complex)
        excited = np.asarray(excited, dtype=float)
        if order == 1:
            return cls(1, sigma, excited)
        b = enumerate_basis(len(sigma), 2)
        single = {"s": sigma, "d": sigma.conj(), "e": excited.astype(complex)}
        v = np.zeros(b.n_slots, dtype=complex)
        for i, key in enumerate(b.keys):
            val = 1.0 + 0j
            for atom, op in key:
                val *= single[op][atom]
            v[i] = val
        return cls.from_slots(2, len(sigma), v)

    @classmethod
    def from_exact(cls, solution, order):
        b = enumerate_basis(solution.n_atoms, order)
        v = np.array([solution.moment(k) for k in b.keys])
        return cls.from_slots(order, solution.n_atoms, v)

    def unphysical_flags(self) -> np.ndarray:
        """Atoms whose population falls outside [-0.05, 1.05]."""
        return np.flatnonzero((self.excited < -0.05) | (self.excited > 1.05))


def coefficient_vector(interaction: InteractionMatrix, geometry: EnsembleGeometry, drive: DriveConfig) -> np.ndarray:
    g = np.asarray(interaction.entries)
    rabi = rabi_frequencies(geometry, drive)
    phase = drive_phases(geometry)
    return np.concatenate([g.ravel(), g.conj().ravel(), rabi * phase.conj(), rabi * phase])


class CompiledEquations:
    """Moment equations for every stored unknown, flattened into index arrays.

    ``closure`` is ``"cumulant"`` (truncate to the basis order) and the
    per-term monomials are kept so the same equations can be evaluated
    against exact expectation values.
    """

    def __init__(self, n_atoms: int, order: int):
        self.basis = b = enumerate_basis(n_atoms, order)
        self.layout = ParamLayout(n_atoms)
        eq, pidx, const, mono_id = [], [], [], []
        monos = {}
        for i, key in enumerate(b.keys):
            for (p, m), c in heisenberg_terms(key, n_atoms).items():
                eq.append(i)
                pidx.append(p)
                const.append(c)
                mono_id.append(monos.setdefault(m, len(monos)))
        self.term_eq = np.array(eq)
        self.term_param = np.array(pidx)
        self.term_const = np.array(const, dtype=complex)
        self.term_mono = np.array(mono_id)
        self.monomials = list(monos)

        # closure of each distinct monomial: list of (coeff, [ext indices])
        n = b.n_slots
        rows_t, rows_c, rows_f = [], [], []
        for t_mono, mono in enumerate(self.monomials):
            for c, factors in self._close(mono):
                rows_t.append(t_mono)
                rows_c.append(c)
                f = [self._ext(r, n) for r in factors] + [0] * (3 - len(factors))
                rows_f.append(f)
        close_mono = np.array(rows_t)
        close_c = np.array(rows_c, dtype=float)
        close_f = np.array(rows_f, dtype=int).reshape(-1, 3)
        # expand terms x closure products
        order_idx = np.argsort(close_mono, kind="stable")
        close_mono, close_c, close_f = close_mono[order_idx], close_c[order_idx], close_f[order_idx]
        starts = np.searchsorted(close_mono, np.arange(len(self.monomials)))
        counts = np.bincount(close_mono, minlength=len(self.monomials))
        reps = counts[self.term_mono]
        term_rep = np.repeat(np.arange(len(self.term_eq)), reps)
        offs = np.arange(len(term_rep)) - np.repeat(np.cumsum(reps) - reps, reps)
        rows = starts[self.term_mono[term_rep]] + offs
        self.eq = self.term_eq[term_rep]
        self.param = self.term_param[term_rep]
        self.const = self.term_const[term_rep] * close_c[rows]
        self.factors = close_f[rows]
        self.n_ext = 2 * n + 1

    @staticmethod
    def _ext(ref, n):
        slot, conj = ref
        return 1 + slot + (n if conj else 0)

    def _close(self, mono):
        b = self.basis
        if not mono:
            return [(1.0, [])]
        if b.order == 1:
            return [(1.0, [b.resolve((f,)) for f in mono])]
        if len(mono) <= 2:
            return [(1.0, [b.resolve(mono)])]
        if len(mono) == 3:
            a, bb, c = ((f,) for f in mono)
            r = b.resolve
            return [
                (1.0, [r(a + bb), r(c)]),
                (1.0, [r(a + c), r(bb)]),
                (1.0, [r(bb + c), r(a)]),
                (-2.0, [r(a), r(bb), r(c)]),
            ]
        raise AssertionError(f"unexpected moment of {len(mono)} atoms: {mono}")

    def _ext_values(self, v):
        return np.concatenate([[1.0 + 0j], v, v.conj()])

    def complex_residual(self, v, params):
        ext = self._ext_values(v)
        f = self.factors
        vals = self.const * params[self.param] * ext[f[:, 0]] * ext[f[:, 1]] * ext[f[:, 2]]
        n = self.basis.n_slots
        out = np.bincount(self.eq, weights=vals.real, minlength=n) + 1j * np.bincount(
            self.eq, weights=vals.imag, minlength=n
        )
        real = self.basis.is_real
        if real.any():
            scale = np.bincount(self.eq, weights=np.abs(vals), minlength=n)
            bad = np.abs(out.imag[real]) > IMAG_TOL * (1.0 + scale[real])
            if bad.any():
                raise AssertionError("imaginary part of a population equation does not vanish")
        return out

    def residual(self, x, params):
        return self.basis.to_flat(self.complex_residual(self.basis.to_complex(x), params))

    def jacobian(self, x, params):
        b = self.basis
        v = b.to_complex(x)
        ext = self._ext_values(v)
        f = self.factors
        w = self.const * params[self.param]
        e0, e1, e2 = ext[f[:, 0]], ext[f[:, 1]], ext[f[:, 2]]
        n = b.n_slots
        m = np.zeros(n * self.n_ext, dtype=complex)
        for col, val in ((f[:, 0], w * e1 * e2), (f[:, 1], w * e0 * e2), (f[:, 2], w * e0 * e1)):
            idx = self.eq * self.n_ext + col
            m += np.bincount(idx, weights=val.real, minlength=m.size)
            m += 1j * np.bincount(idx, weights=val.imag, minlength=m.size)
        m = m.reshape(n, self.n_ext)
        dv, dvc = m[:, 1 : n + 1], m[:, n + 1 :]
        cols = b.flat_slot
        jc = np.where(b.flat_is_im[None, :], 1j * (dv - dvc)[:, cols], (dv + dvc)[:, cols])
        rows = jc[b.flat_slot]
        return np.where(b.flat_is_im[:, None], rows.imag, rows.real)

    def untruncated_residual(self, moment, params):
        """Complex residual with every monomial replaced by ``moment(key)``,
        no closure applied."""
        mvals = np.array([moment(m) if m else 1.0 for m in self.monomials], dtype=complex)
        vals = self.term_const * params[self.term_param] * mvals[self.term_mono]
        n = self.basis.n_slots
        return np.bincount(self.term_eq, weights=vals.real, minlength=n) + 1j * np.bincount(
            self.term_eq, weights=vals.imag, minlength=n
        )


@lru_cache(maxsize=16)
def compiled_equations(n_atoms: int, order: int) -> CompiledEquations:
    return CompiledEquations(n_atoms, order)


# -- first order, written out directly -----------------------------------------

def _order1_parts(x, n):
    x = np.asarray(x, dtype=float)
    sigma = x[0 : 2 * n : 2] + 1j * x[1 : 2 * n : 2]
    return sigma, x[2 * n :]


def mean_field_residual(x, g, h):
    """First-order residual from the coupling matrix ``g`` (diagonal included)
    and the complex drive ``h = Omega * exp(ikz)``.

        0 = G_mm s_m + (i/2) h_m (1 - 2 e_m) + (1 - 2 e_m) sum_{n != m} G_mn s_n
        0 = Im(conj(h_m) s_m) + 2 Re(G_mm) e_m + 2 Re(conj(s_m) sum_{n != m} G_mn s_n)
    """
    n = len(h)
    sigma, exc = _order1_parts(x, n)
    diag = np.diagonal(g)
    u = g @ sigma - diag * sigma
    r_sig = diag * sigma + (1.0 - 2.0 * exc) * (0.5j * h + u)
    r_e = (h.conj() * sigma).imag + 2.0 * diag.real * exc + 2.0 * (sigma.conj() * u).real
    out = np.empty(3 * n)
    out[0 : 2 * n : 2] = r_sig.real
    out[1 : 2 * n : 2] = r_sig.imag
    out[2 * n :] = r_e
    return out


def mean_field_jacobian(x, g, h):
    n = len(h)
    sigma, exc = _order1_parts(x, n)
    diag = np.diagonal(g)
    goff = g - np.diag(diag)
    u = goff @ sigma
    one = 1.0 - 2.0 * exc
    # Wirtinger blocks: d/d sigma and d/d conj(sigma)
    ds_s = np.diag(diag) + one[:, None] * goff
    ds_e = np.diag(-1j * h - 2.0 * u)
    de_s = np.diag(-0.5j * h.conj() + u.conj()) + sigma.conj()[:, None] * goff
    de_sc = np.diag(0.5j * h + u) + sigma[:, None] * goff.conj()
    jac = np.zeros((3 * n, 3 * n))
    re_c = np.arange(0, 2 * n, 2)
    im_c = re_c + 1
    e_c = np.arange(2 * n, 3 * n)
    # sigma rows: no conj(sigma) dependence
    jac[np.ix_(re_c, re_c)] = ds_s.real
    jac[np.ix_(im_c, re_c)] = ds_s.imag
    jac[np.ix_(re_c, im_c)] = (1j * ds_s).real
    jac[np.ix_(im_c, im_c)] = (1j * ds_s).imag
    jac[np.ix_(re_c, e_c)] = ds_e.real
    jac[np.ix_(im_c, e_c)] = ds_e.imag
    # population rows are real; the full derivative is d/ds + d/dconj(s)
    jac[np.ix_(e_c, re_c)] = (de_s + de_sc).real
    jac[np.ix_(e_c, im_c)] = (1j * (de_s - de_sc)).real
    jac[np.ix_(e_c, e_c)] = np.diag(2.0 * diag.real)
    return jac


def _check_order(state, order):
    if state.order != order:
        raise InvalidArgumentError(f"expected an order-{order} MomentState, got order {state.order}")


def residual_order1(state: MomentState, interaction, geometry, drive) -> np.ndarray:
    _check_order(state, 1)
    h = rabi_frequencies(geometry, drive) * drive_phases(geometry)
    return mean_field_residual(state.pack(), np.asarray(interaction.entries), h)


def residual_order2(state: MomentState, interaction, geometry, drive) -> np.ndarray:
    _check_order(state, 2)
    eqs = compiled_equations(state.n_atoms, 2)
    return eqs.residual(state.pack(), coefficient_vector(interaction, geometry, drive))
