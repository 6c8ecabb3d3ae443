import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atomscatter.errors import IllConditionedError
from atomscatter.exact import solve_exact
from atomscatter.geometry import (
    DriveConfig,
    EnsembleGeometry,
    build_rect_lattice,
    drive_phases,
    rabi_frequencies,
    sample_gaussian_cloud,
)
from atomscatter.kernel import InteractionMatrix, build_interaction_matrix
from atomscatter.linear import solve_linear


def test_single_atom():
    g = build_rect_lattice(1, 1, 1, 1)
    s = solve_linear(build_interaction_matrix(g, 0.5), g, DriveConfig(0.1, 2.5, 0.5))
    assert s[0] == pytest.approx(0.05j / (0.5 - 0.5j))


@given(st.integers(0, 1000), st.floats(-4, 4))
@settings(max_examples=20)
def test_solves_coupled_system(seed, delta):
    g = sample_gaussian_cloud(10, (0.5, 0.5, 0.5), seed=seed)
    d = DriveConfig(0.1, 2.5, delta)
    m = build_interaction_matrix(g, delta)
    s = solve_linear(m, g, d)
    rhs = -0.5j * rabi_frequencies(g, d) * drive_phases(g)
    assert np.allclose(m.entries @ s, rhs, atol=1e-12)


def test_weak_drive_agrees_with_exact():
    g = build_rect_lattice(2, 2, 0.7, 0.7)
    d = DriveConfig(1e-3, 2.5, 0.3)
    m = build_interaction_matrix(g, 0.3)
    lin = solve_linear(m, g, d)
    ex = solve_exact(g, d, m).sigma
    assert np.max(np.abs(lin - ex)) / np.max(np.abs(ex)) < 1e-4


def test_scales_with_drive():
    g = build_rect_lattice(2, 2, 0.5, 0.5)
    m = build_interaction_matrix(g)
    a = solve_linear(m, g, DriveConfig(0.1))
    b = solve_linear(m, g, DriveConfig(2.0))
    assert np.allclose(b, 20 * a, rtol=1e-12)


def test_ill_conditioned():
    g = EnsembleGeometry([[0, 0, 0], [1, 0, 0]])
    m = InteractionMatrix(np.array([[1, 1], [1, 1 + 1e-14]], dtype=complex), 0.0)
    with pytest.raises(IllConditionedError):
        solve_linear(m, g, DriveConfig(0.1))
