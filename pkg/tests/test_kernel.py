import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra import numpy as hnp

from atomscatter.errors import SingularPairError
from atomscatter.geometry import EnsembleGeometry, build_rect_lattice, sample_gaussian_cloud
from atomscatter.kernel import build_interaction_matrix, pair_green

# evaluated with mpmath at 30 digits from the closed-form propagator
G_ALONG_DIPOLE = 0.0379954438658766643 + 0.0060471627062249042j
G_PERP_DIPOLE = -0.0189977219329383321 + 0.1163426259658090497j


def test_pair_green_reference_values():
    assert pair_green((1, 0, 0)) == pytest.approx(G_ALONG_DIPOLE, abs=1e-14)
    assert pair_green((0, 1, 0)) == pytest.approx(G_PERP_DIPOLE, abs=1e-14)


@pytest.mark.parametrize("theta", [0.0, np.pi / 4, np.pi / 2, 1.1])
def test_small_separation_real_part(theta):
    r = 1e-3 / (2 * np.pi)
    s = r * np.array([np.cos(theta), np.sin(theta), 0.0])
    assert abs(pair_green(s).real + 0.5) < 1e-4


def test_zero_separation_raises():
    with pytest.raises(SingularPairError):
        pair_green((0, 0, 0))


vec = hnp.arrays(float, 3, elements=st.floats(-5, 5)).filter(lambda v: np.linalg.norm(v) > 1e-2)


@given(vec)
def test_reciprocity(s):
    assert pair_green(s) == pytest.approx(pair_green(-s), rel=1e-12, abs=1e-14)


@given(vec)
def test_far_field_bound(s):
    xi = 2 * np.pi * np.linalg.norm(s)
    assert abs(pair_green(s)) <= 0.75 * (1 / xi + 2 / xi**2 + 2 / xi**3) * (1 + 1e-12)


def test_asymptotic_decay():
    s = np.array([0.0, 200.0, 0.0])
    xi = 2 * np.pi * 200
    assert abs(pair_green(s)) == pytest.approx(0.75 / xi, rel=1e-3)


def test_matrix_single_atom():
    m = build_interaction_matrix(build_rect_lattice(1, 1, 1, 1), 0.0)
    assert m.entries.shape == (1, 1)
    assert m.entries[0, 0] == -0.5


def test_matrix_two_atoms():
    g = EnsembleGeometry([[0, 0, 0], [0, 1, 0]])
    m = build_interaction_matrix(g, 2.0)
    assert np.allclose(np.diag(m.entries), 2j - 0.5)
    assert m.entries[0, 1] == pytest.approx(G_PERP_DIPOLE, abs=1e-14)
    assert m.entries[0, 1] == m.entries[1, 0]


def test_detuning_only_on_diagonal():
    g = sample_gaussian_cloud(12, (0.5, 0.5, 0.5), seed=1)
    a = build_interaction_matrix(g, 0.0).entries
    b = build_interaction_matrix(g, 1.0).entries
    assert np.array_equal(b - a, 1j * np.eye(12))
    assert np.array_equal(build_interaction_matrix(g, 1.0).entries, build_interaction_matrix(g, 0.0).with_detuning(1.0).entries)
    assert np.array_equal(a, a.T)


def test_coincident_atoms_named():
    g = EnsembleGeometry([[0, 0, 0], [1, 0, 0], [1, 0, 1e-4]])
    with pytest.raises(SingularPairError) as err:
        build_interaction_matrix(g)
    assert err.value.indices == (1, 2)


def test_dump(tmp_path):
    m = build_interaction_matrix(build_rect_lattice(2, 1, 0.5, 0.5), 0.3)
    m.dump(tmp_path / "g.txt")
    table = np.loadtxt(tmp_path / "g.txt")
    assert table.shape == (4, 4)
    assert table[1, 2] == pytest.approx(m.entries[0, 1].real)
