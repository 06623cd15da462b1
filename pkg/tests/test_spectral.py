import numpy as np
import pytest

from src.cyclewalk.arc_graph import GraphKind, WalkState, build_graph, step_amplitudes
from src.cyclewalk.errors import DegeneratePointError
from src.cyclewalk.homology import coin_functional
from src.cyclewalk.spectral import (
    BANDS,
    band_lambda,
    bloch_walk_matrix,
    branch_table,
    build_P,
    expected_bloch_spectrum,
    fibre_random_walk,
    fourier_initial,
    midpoint_grid,
    null_band_eigenvector,
    spectral_map,
    uniform_grid,
    velocity,
    velocity_derivative,
    walk_eigenvector,
    walk_spectrum_support,
)

K_SAMPLES = (-2.9, -1.1, 0.3, 0.7, 2.2)


def test_random_walk_is_column_stochastic_at_zero():
    np.testing.assert_allclose(build_P(0.0).matrix.sum(axis=0).real, np.ones(4))


def test_characteristic_polynomial_at_zero():
    np.testing.assert_allclose(build_P(0.0).characteristic_polynomial(), [1, 0, -7 / 9, -2 / 9, 0], atol=1e-14)


@pytest.mark.parametrize("k", K_SAMPLES)
def test_random_walk_spectrum(k):
    walk = build_P(k)
    symmetrized = walk.symmetrized()
    np.testing.assert_allclose(symmetrized, symmetrized.conj().T, atol=1e-15)
    expected = sorted([band_lambda(j, k) for j in range(3)] + [0.0])
    np.testing.assert_allclose(walk.eigenvalues(), expected, atol=1e-12)


@pytest.mark.parametrize("k", K_SAMPLES)
def test_fibre_walk_is_conjugate_symmetrized(k):
    np.testing.assert_allclose(fibre_random_walk(k), build_P(k).symmetrized().conj(), atol=1e-15)


def test_bands_reach_edges():
    k = uniform_grid(4096)
    for j, (low, high) in enumerate(BANDS):
        lam = band_lambda(j, k)
        np.testing.assert_allclose(9 * lam**3 - 7 * lam, 2 * np.cos(k), atol=1e-12)
        assert lam.min() == pytest.approx(low, abs=1e-12)
        assert lam.max() == pytest.approx(high, abs=1e-12)


def test_band_index_checked():
    with pytest.raises(ValueError):
        band_lambda(3, 0.1)
    with pytest.raises(ValueError):
        spectral_map(0.2, 2)


@pytest.mark.parametrize("k", K_SAMPLES)
def test_bloch_walk_is_unitary_with_expected_spectrum(k):
    matrix = bloch_walk_matrix(k).matrix
    np.testing.assert_allclose(matrix @ matrix.conj().T, np.eye(10), atol=1e-14)
    eigenvalues = bloch_walk_matrix(k).eigenvalues()
    for value in expected_bloch_spectrum(k):
        assert np.min(np.abs(eigenvalues - value)) < 1e-9


@pytest.mark.parametrize("k", K_SAMPLES)
@pytest.mark.parametrize("j", range(3))
@pytest.mark.parametrize("l", range(2))
def test_walk_eigenvectors(k, j, l):
    vector = walk_eigenvector(k, j, l)
    operator = bloch_walk_matrix(k)
    assert np.linalg.norm(vector) == pytest.approx(1.0)
    np.testing.assert_allclose(operator @ vector, spectral_map(band_lambda(j, k), l) * vector, atol=1e-10)


def test_band_edge_eigenvector_is_degenerate():
    with pytest.raises(DegeneratePointError):
        walk_eigenvector(0.0, 0, 0)


@pytest.mark.parametrize("k", K_SAMPLES)
def test_null_band_lifts_to_cycle_functional(k):
    vector = null_band_eigenvector(0)
    np.testing.assert_allclose(bloch_walk_matrix(k) @ vector, 1j * vector, atol=1e-14)
    assert abs(np.vdot(coin_functional(1), vector)) == pytest.approx(1.0)


def test_constant_eigenvectors():
    for m in range(4):
        vector = coin_functional(m)
        for k in K_SAMPLES:
            np.testing.assert_allclose(bloch_walk_matrix(k) @ vector, 1j**m * vector, atol=1e-14)


def test_fourier_transform_of_one_step(rng):
    space = build_graph(GraphKind.C4_PRIME, 3)
    amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
    inner = np.flatnonzero(np.abs(space.arc_cell) <= 1)
    amplitudes[inner] = rng.normal(size=inner.size) + 1j * rng.normal(size=inner.size)
    state = WalkState(space, amplitudes).normalized()
    stepped = WalkState(space, step_amplitudes(space, state.amplitudes), 1)
    before, after = fourier_initial(state), fourier_initial(stepped)
    for k in K_SAMPLES:
        np.testing.assert_allclose(after(k), bloch_walk_matrix(k) @ before(k), atol=1e-13)


def test_plancherel(rng, prime_space):
    amplitudes = np.zeros(prime_space.n_arcs, dtype=np.complex128)
    inner = np.flatnonzero(np.abs(prime_space.arc_cell) <= 2)
    amplitudes[inner] = rng.normal(size=inner.size)
    state = WalkState(prime_space, amplitudes).normalized()
    assert fourier_initial(state).plancherel_norm() == pytest.approx(1.0, abs=1e-12)


def test_fourier_needs_chain(tilde_space):
    with pytest.raises(ValueError):
        fourier_initial(WalkState.basis(tilde_space, 0))


def test_velocity_extrema():
    k = uniform_grid(4096)
    for l in range(2):
        assert np.max(np.abs(velocity(0, l, k))) == pytest.approx(1 / np.sqrt(10), abs=1e-10)
        assert np.max(np.abs(velocity(2, l, k))) == pytest.approx(2 / 7, abs=1e-10)
        assert np.max(np.abs(velocity(1, l, k))) == pytest.approx(1 / np.sqrt(10), abs=1e-10)


def test_velocity_symmetry():
    k = midpoint_grid(256)
    for l in range(2):
        np.testing.assert_allclose(velocity(0, l, k + np.pi), -velocity(1, l, k), atol=1e-12)
        np.testing.assert_allclose(velocity(1, 1 - l, k), -velocity(1, l, k), atol=1e-15)


def test_velocity_matches_phase_derivative():
    k = np.array([-2.5, -1.0, 0.4, 1.3, 2.8])
    h = 1e-6
    for j in range(3):
        for l in range(2):
            phase = np.angle(spectral_map(band_lambda(j, k + h), l) / spectral_map(band_lambda(j, k - h), l))
            np.testing.assert_allclose(velocity(j, l, k), -phase / (2 * h), atol=1e-6)


def test_velocity_derivative_value():
    assert abs(velocity_derivative(2, 0, 0.0)) == pytest.approx(0.53033, abs=1e-5)
    assert velocity_derivative(2, 0, np.pi / 2) == pytest.approx(0.0, abs=1e-12)


def test_grids():
    with pytest.raises(ValueError):
        midpoint_grid(6)
    grid = uniform_grid(8)
    assert 0.0 in grid and -np.pi in grid
    assert not np.any(np.isclose(midpoint_grid(8), 0.0))


def test_branch_table_shapes():
    table = branch_table(64)
    assert table.size == 64
    assert table.vectors.shape == (3, 2, 64, 10)
    np.testing.assert_allclose(np.linalg.norm(table.vectors, axis=-1), 1.0)


def test_spectrum_support():
    support = walk_spectrum_support()
    assert support.contains(np.exp(1j * np.arccos(0.9)))
    assert support.contains(np.exp(1j * np.arccos(0.1)))
    assert support.contains(1j)
    assert not support.contains(np.exp(1j * np.arccos(0.5)))
    assert not support.contains(0.5)
