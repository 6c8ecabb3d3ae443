"""Symbolic algebra of two-level-atom operators and their Heisenberg equations.

A monomial is a sorted tuple of ``(atom, op)`` with ``op`` one of ``'s'``
(lowering), ``'d'`` (raising) or ``'e'`` (excited projector), at most one
factor per atom. Polynomials are dicts from monomial to coefficient.
"""
from __future__ import annotations

from collections import defaultdict
from itertools import product

# left * right on a single atom; None stands for the identity
_LOCAL_PRODUCT = {
    ("s", "s"): (),
    ("s", "d"): ((None, 1.0), ("e", -1.0)),
    ("s", "e"): (("s", 1.0),),
    ("d", "s"): (("e", 1.0),),
    ("d", "d"): (),
    ("d", "e"): (),
    ("e", "s"): (),
    ("e", "d"): (("d", 1.0),),
    ("e", "e"): (("e", 1.0),),
}

_ADJOINT = {"s": "d", "d": "s", "e": "e"}


def monomial(*factors):
    return tuple(sorted(factors))


def adjoint(mono):
    return tuple((a, _ADJOINT[o]) for a, o in mono)


def multiply(left, right):
    """Product of two monomials, reduced to a polynomial in the same basis."""
    lmap = dict(left)
    rmap = dict(right)
    atoms = sorted(set(lmap) | set(rmap))
    choices = []
    for a in atoms:
        if a in lmap and a in rmap:
            choices.append([(a, op, c) for op, c in _LOCAL_PRODUCT[lmap[a], rmap[a]]])
        else:
            choices.append([(a, lmap.get(a, rmap.get(a)), 1.0)])
    out = {}
    for combo in product(*choices):
        coeff = 1.0
        mono = []
        for a, op, c in combo:
            coeff *= c
            if op is not None:
                mono.append((a, op))
        key = tuple(mono)
        out[key] = out.get(key, 0.0) + coeff
    return out


def commutator(left, right):
    out = dict(multiply(left, right))
    for k, c in multiply(right, left).items():
        out[k] = out.get(k, 0.0) - c
    return {k: c for k, c in out.items() if c != 0}


def poly_times_monomial(poly, mono, left=False):
    out = {}
    for k, c in poly.items():
        prod = multiply(mono, k) if left else multiply(k, mono)
        for k2, c2 in prod.items():
            out[k2] = out.get(k2, 0.0) + c * c2
    return {k: c for k, c in out.items() if c != 0}


class ParamLayout:
    """Index layout of the numeric coefficient vector for n atoms:
    G[mu, nu], conj(G)[nu, mu], Omega*exp(-ikz), Omega*exp(+ikz)."""

    def __init__(self, n_atoms):
        self.n = n_atoms

    def g(self, mu, nu):
        return mu * self.n + nu

    def gconj(self, nu, mu):
        return self.n * self.n + nu * self.n + mu

    def h_minus(self, mu):
        return 2 * self.n * self.n + mu

    def h_plus(self, mu):
        return 2 * self.n * self.n + self.n + mu

    @property
    def size(self):
        return 2 * self.n * self.n + 2 * self.n


def heisenberg_terms(target, n_atoms):
    """Right-hand side of d<target>/dt as ``{(param_index, monomial): const}``.

    The generator follows from the master equation with the coupled
    dissipator sum_{mu nu} G_{mu nu}[s_mu^+, s_nu rho] + G*_{nu mu}[rho s_mu^+, s_nu]
    and the drive H = -1/2 sum_mu Omega_mu (e^{-ikz} s_mu + e^{ikz} s_mu^+):

        dA/dt = i[H, A] + sum G_{mu nu} [A, s_mu^+] s_nu + G*_{nu mu} s_mu^+ [s_nu, A]
    """
    lay = ParamLayout(n_atoms)
    atoms = [a for a, _ in target]
    terms = defaultdict(complex)

    def add(pidx, const, poly):
        for mono, c in poly.items():
            terms[pidx, mono] += const * c

    for mu in atoms:
        add(lay.h_minus(mu), -0.5j, commutator(((mu, "s"),), target))
        add(lay.h_plus(mu), -0.5j, commutator(((mu, "d"),), target))
        left = commutator(target, ((mu, "d"),))
        for nu in range(n_atoms):
            add(lay.g(mu, nu), 1.0, poly_times_monomial(left, ((nu, "s"),)))
    for nu in atoms:
        right = commutator(((nu, "s"),), target)
        for mu in range(n_atoms):
            add(lay.gconj(nu, mu), 1.0, poly_times_monomial(right, ((mu, "d"),), left=True))
    return {k: c for k, c in terms.items() if c != 0}
