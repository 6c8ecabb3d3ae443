import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomscatter.errors import InvalidArgumentError, SamplingExhaustedError
from atomscatter.geometry import (
    DriveConfig,
    EnsembleGeometry,
    beam_profile,
    build_rect_lattice,
    load_geometry,
    rabi_at,
    rabi_frequencies,
    sample_gaussian_cloud,
    save_geometry,
)


def test_lattice_2x2_centered():
    g = build_rect_lattice(2, 2, 0.7, 0.7)
    assert g.atom_count == 4
    assert np.allclose(np.sort(g.positions[:, 0]), [-0.35, -0.35, 0.35, 0.35])
    assert np.allclose(np.abs(g.positions[:, :2]), 0.35)
    assert np.all(g.positions[:, 2] == 0)


@pytest.mark.parametrize("a", [0.1, 0.7, 3.0])
def test_single_site_lattice_at_origin(a):
    g = build_rect_lattice(1, 1, a, a)
    assert np.array_equal(g.positions, np.zeros((1, 3)))


def test_fig5_lattice_extent():
    g = build_rect_lattice(30, 30, 0.3, 0.9)
    assert g.atom_count == 900
    span = g.positions.max(axis=0) - g.positions.min(axis=0)
    assert span[0] == pytest.approx(8.7)
    assert span[1] == pytest.approx(26.1)
    assert np.allclose(g.positions.mean(axis=0), 0, atol=1e-12)


@pytest.mark.parametrize("args", [(0, 2, 1, 1), (2, 2, 0, 1), (2, 2, 1, -1), (1.5, 2, 1, 1)])
def test_lattice_rejects_bad_arguments(args):
    with pytest.raises(InvalidArgumentError):
        build_rect_lattice(*args)


@given(st.integers(1, 6), st.integers(1, 6), st.floats(0.1, 2), st.floats(0.1, 2))
def test_lattice_swap_is_rotation(nx, ny, ax, ay):
    a = build_rect_lattice(nx, ny, ax, ay).positions
    b = build_rect_lattice(ny, nx, ay, ax).positions
    rotated = np.column_stack([-b[:, 1], b[:, 0], b[:, 2]])
    key = lambda p: np.lexsort(np.round(p.T, 9))
    assert np.allclose(a[key(a)], rotated[key(rotated)])


def test_cloud_is_reproducible_and_separated():
    a = sample_gaussian_cloud(20, (0.25, 0.25, 1.5), seed=3)
    b = sample_gaussian_cloud(20, (0.25, 0.25, 1.5), seed=3)
    assert np.array_equal(a.positions, b.positions)
    assert a.min_pair_distance() >= 0.05
    c = sample_gaussian_cloud(20, (0.25, 0.25, 1.5), seed=4)
    assert not np.array_equal(a.positions, c.positions)


def test_single_atom_cloud():
    g = sample_gaussian_cloud(1, (1, 2, 3), seed=0)
    assert g.atom_count == 1


def test_cloud_rms_law_of_large_numbers():
    g = sample_gaussian_cloud(10_000, (1, 1, 1), seed=11, min_separation=0)
    rms = np.sqrt(np.mean(g.positions**2, axis=0))
    assert np.all(np.abs(rms - 1.0) < 0.03)


def test_cloud_sampling_exhausted():
    with pytest.raises(SamplingExhaustedError):
        sample_gaussian_cloud(50, (0.01, 0.01, 0.01), seed=0, min_separation=0.5, max_redraws=100)


def test_beam_profile_values():
    assert beam_profile((0, 0, 7.0), 2.5) == 1.0
    assert beam_profile((2.5, 0, 0), 2.5) == pytest.approx(np.exp(-1))
    assert beam_profile((1, 1, 0), 2.5) == pytest.approx(0.726149, abs=1e-6)


@given(st.floats(0, 10), st.floats(0, 10))
def test_beam_profile_monotone(r1, r2):
    f1, f2 = beam_profile((r1, 0, 0), 2.5), beam_profile((0, r2, 0), 2.5)
    if r1 < r2:
        assert f1 >= f2
    assert 0 <= f1 <= 1
    if r1 > 1e-6:
        assert f1 < 1


def test_rabi_at():
    g = EnsembleGeometry([[0, 0, 0], [2.5, 0, 0]])
    assert rabi_at(g, DriveConfig(0.1), 0) == pytest.approx(0.1)
    assert rabi_at(g, DriveConfig(1.0), 1) == pytest.approx(np.exp(-1))
    with pytest.raises(InvalidArgumentError):
        rabi_at(g, DriveConfig(1.0), 2)


def test_rabi_2x2_symmetric():
    g = build_rect_lattice(2, 2, 0.7, 0.7)
    om = rabi_frequencies(g, DriveConfig(0.1))
    assert np.allclose(om, 0.1 * np.exp(-0.245 / 6.25), rtol=1e-14)


def test_geometry_invariants():
    with pytest.raises(InvalidArgumentError):
        EnsembleGeometry([[0, 0, 0]], dipole_orientation=(1, 1, 0))
    with pytest.raises(InvalidArgumentError):
        DriveConfig(omega0=-1)
    with pytest.raises(InvalidArgumentError):
        DriveConfig(waist=0)


def test_geometry_table_roundtrip(tmp_path):
    g = sample_gaussian_cloud(7, (1, 1, 1), seed=2)
    save_geometry(tmp_path / "g.txt", g)
    assert np.array_equal(load_geometry(tmp_path / "g.txt").positions, g.positions)
