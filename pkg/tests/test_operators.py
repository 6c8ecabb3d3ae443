import itertools

import numpy as np
import pytest

from atomscatter.exact import LOCAL, local_operator
from atomscatter.operators import commutator, multiply

OPS = ("s", "d", "e")


def as_matrix(poly, n):
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for mono, c in poly.items():
        m = np.eye(dim)
        for atom, op in mono:
            m = m @ local_operator(n, atom, op).toarray()
        out += c * m
    return out


def mono_matrix(mono, n):
    return as_matrix({mono: 1.0}, n)


@pytest.mark.parametrize("a,b", list(itertools.product(OPS, OPS)))
def test_local_products_match_matrices(a, b):
    got = as_matrix(multiply(((0, a),), ((0, b),)), 1)
    assert np.allclose(got, LOCAL[a] @ LOCAL[b])


def test_operator_identities():
    s, d, e = LOCAL["s"], LOCAL["d"], LOCAL["e"]
    assert np.allclose(d @ s, e)
    assert np.allclose(s @ s, 0)
    assert np.allclose(s @ e, s)
    assert np.allclose(e @ s, 0)
    assert np.allclose(e @ e, e)


def test_random_commutators_three_atoms(rng):
    for _ in range(30):
        atoms_a = rng.choice(3, size=rng.integers(1, 3), replace=False)
        atoms_b = rng.choice(3, size=rng.integers(1, 3), replace=False)
        a = tuple(sorted((int(x), OPS[rng.integers(3)]) for x in atoms_a))
        b = tuple(sorted((int(x), OPS[rng.integers(3)]) for x in atoms_b))
        ma, mb = mono_matrix(a, 3), mono_matrix(b, 3)
        assert np.allclose(as_matrix(commutator(a, b), 3), ma @ mb - mb @ ma)
