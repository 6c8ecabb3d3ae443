import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atomscatter.errors import CapacityError, InvalidArgumentError
from atomscatter.exact import (
    build_liouvillian,
    detuning_generator,
    expectations,
    solve_exact,
    steady_state,
)
from atomscatter.geometry import DriveConfig, EnsembleGeometry, build_rect_lattice
from atomscatter.kernel import build_interaction_matrix

from conftest import bloch_steady_state

ONE = build_rect_lattice(1, 1, 1, 1)


def test_single_atom_reference():
    sol = solve_exact(ONE, DriveConfig(0.1))
    assert sol.sigma[0] == pytest.approx(0.0980392156862745j, abs=1e-12)
    assert sol.excited[0] == pytest.approx(0.00980392156862745, abs=1e-12)


@given(st.floats(0.0, 3.0), st.floats(-5.0, 5.0))
@settings(max_examples=25)
def test_single_atom_bloch(omega, delta):
    sol = solve_exact(ONE, DriveConfig(omega, 2.5, delta))
    s, e = bloch_steady_state(omega, delta)
    assert sol.sigma[0] == pytest.approx(s, abs=1e-10)
    assert sol.excited[0] == pytest.approx(e, abs=1e-10)


def test_undriven_single_atom_spectrum():
    lv = build_liouvillian(ONE, DriveConfig(0.0)).toarray()
    ev = np.sort_complex(np.linalg.eigvals(lv))
    assert np.allclose(ev, [-1, -0.5, -0.5, 0], atol=1e-12)


def test_trace_preservation_and_hermiticity(rng):
    g = EnsembleGeometry(rng.normal(scale=0.4, size=(3, 3)))
    lv = build_liouvillian(g, DriveConfig(0.7, 2.5, 0.3))
    dim = 8
    for _ in range(3):
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        rho = a @ a.conj().T
        drho = (lv @ rho.ravel()).reshape(dim, dim)
        assert abs(np.trace(drho)) < 1e-12
        assert np.max(np.abs(drho - drho.conj().T)) < 1e-12


def test_detuning_generator_linearity():
    g = build_rect_lattice(2, 1, 0.4, 0.4)
    base = build_liouvillian(g, DriveConfig(0.3, 2.5, 0.0))
    full = build_liouvillian(g, DriveConfig(0.3, 2.5, 1.7))
    assert abs(base + 1.7 * detuning_generator(2) - full).max() < 1e-14


def test_density_matrix_properties():
    g = build_rect_lattice(2, 2, 0.7, 0.7)
    sol = solve_exact(g, DriveConfig(0.5, 2.5, -0.4))
    assert sol.rho.trace_error < 1e-12
    assert sol.rho.hermiticity_error < 1e-12
    assert sol.rho.min_eigenvalue > -1e-12
    assert sol.residual < 1e-10


def test_far_apart_atoms_factorize():
    g = EnsembleGeometry([[0, 0, 0], [0, 100, 0]])
    d = DriveConfig(0.8, 1e6, 0.2)
    sol = solve_exact(g, d)
    s, e = bloch_steady_state(0.8, 0.2)
    assert np.allclose(sol.sigma, s, atol=1e-2)
    assert abs(expectations(sol, "sd0*s1") - abs(s) ** 2) < 1e-2


def test_permutation_covariance(rng):
    pos = rng.normal(scale=0.3, size=(3, 3))
    perm = [2, 0, 1]
    d = DriveConfig(0.4, 2.5, 0.5)
    a = solve_exact(EnsembleGeometry(pos), d)
    b = solve_exact(EnsembleGeometry(pos[perm]), d)
    assert np.allclose(a.sigma[perm], b.sigma, atol=1e-10)
    assert expectations(a, "sd0*s2") == pytest.approx(expectations(b, "sd1*s0"), abs=1e-10)


def test_expectation_strings():
    sol = solve_exact(build_rect_lattice(2, 1, 0.5, 0.5), DriveConfig(0.3))
    assert expectations(sol, "1") == pytest.approx(1.0)
    assert expectations(sol, "") == pytest.approx(1.0)
    assert expectations(sol, "s0") == pytest.approx(sol.sigma[0])
    assert expectations(sol, "sd0 * s0") == pytest.approx(sol.excited[0])
    assert expectations(sol, "e1") == pytest.approx(sol.excited[1])
    assert expectations(sol, "sd0*s1") == pytest.approx(np.conj(expectations(sol, "sd1*s0")))
    for bad in ("x0", "s", "s9", "s0**"):
        with pytest.raises(InvalidArgumentError):
            expectations(sol, bad)


def test_capacity():
    g = build_rect_lattice(3, 3, 1, 1)
    with pytest.raises(CapacityError):
        build_liouvillian(g, DriveConfig(0.1), cap=8)


def test_large_sparse_path():
    # 6 atoms -> 4096 unknowns, sparse LU branch
    g = build_rect_lattice(3, 2, 0.6, 0.6)
    d = DriveConfig(0.2)
    sol = steady_state(build_liouvillian(g, d, build_interaction_matrix(g)))
    assert sol.residual < 1e-10
    assert sol.rho.trace_error < 1e-12
