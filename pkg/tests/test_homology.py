import numpy as np
import pytest

from src.cyclewalk.arc_graph import GraphKind, WalkState, build_graph, step_amplitudes
from src.cyclewalk.errors import InvalidPathError
from src.cyclewalk.evolution import LemmaCoefficients, iterate, vertex_distribution, vertex_probabilities
from src.cyclewalk.homology import (
    cell_projector_formula,
    coin_functional,
    cycle_functional,
    cycle_path,
    gram_projection_norm,
    homological_projection,
    homology_basis,
    localization_predicate,
    path_functional,
    reverse_path,
    trapped_profile,
)
from src.cyclewalk.presets import case_ii, fig3a, fig3b, uniform_states


@pytest.mark.parametrize("kind", ["tilde-c4", "c4-prime"])
@pytest.mark.parametrize("m", range(4))
def test_cycle_functional_is_eigenvector(kind, m):
    space = build_graph(kind, 2)
    for cell in space.cells[1:-1] or [0]:
        eta = cycle_functional(space, m, cell)
        vector = eta.vector
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        np.testing.assert_allclose(step_amplitudes(space, vector), eta.eigenvalue * vector, atol=1e-14)


def test_basis_is_orthonormal():
    basis = homology_basis(build_graph(GraphKind.C4_PRIME, 2))
    matrix = basis.matrix()
    assert len(basis) == 20
    np.testing.assert_allclose(matrix.conj().T @ matrix, np.eye(20), atol=1e-14)


def test_coin_functional_matches_cell_vector(prime_space):
    for m in range(4):
        eta = cycle_functional(prime_space, m, cell=1)
        in_coins = np.array([eta.vector[prime_space.coin_arc(c, 1)] for c in range(10)])
        np.testing.assert_allclose(in_coins, coin_functional(m), atol=1e-15)


def test_reverse_path_of_cycle(prime_space):
    path = cycle_path(prime_space)
    back = reverse_path(prime_space, path)
    assert reverse_path(prime_space, back) == path
    assert set(path).isdisjoint(back)


def test_open_path_rejected(prime_space):
    with pytest.raises(InvalidPathError):
        path_functional(prime_space, [prime_space.coin_arc(2), prime_space.coin_arc(8)], 0)
    with pytest.raises(InvalidPathError):
        path_functional(prime_space, [], 1)


def test_path_functional_of_cycle_has_unit_entries(prime_space):
    vector = path_functional(prime_space, cycle_path(prime_space), 2)
    assert np.count_nonzero(vector) == 4
    np.testing.assert_allclose(np.abs(vector[np.flatnonzero(vector)]), 1.0)


def test_named_state_deltas(prime_space):
    assert homological_projection(fig3a(prime_space)).delta < 1e-14
    assert homological_projection(fig3b(prime_space)).delta == pytest.approx(0.5, abs=1e-12)
    uniform = np.mean([homological_projection(s).delta for s in uniform_states(prime_space)])
    assert uniform == pytest.approx(2 / 5, abs=1e-12)


def test_projection_report(prime_space):
    report = homological_projection(fig3b(prime_space)).as_dict()
    assert report["localized"] is True
    assert sum(o["weight"] for o in report["overlaps"]) == pytest.approx(report["delta"])
    assert {o["cell"] for o in report["overlaps"]} == set(prime_space.cells)


def test_gram_projection_agrees(rng):
    space = build_graph(GraphKind.C4_PRIME, 1)
    amplitudes = rng.normal(size=space.n_arcs) + 1j * rng.normal(size=space.n_arcs)
    state = WalkState(space, amplitudes).normalized()
    assert gram_projection_norm(state) == pytest.approx(homological_projection(state).delta, abs=1e-12)


def test_cell_projector_formula(rng, tilde_space):
    coeffs = LemmaCoefficients.random(rng)
    projection = homological_projection(coeffs.state(tilde_space))
    by_m = {o.m: o.weight for o in projection.overlaps}
    for m in range(4):
        assert cell_projector_formula(coeffs, m) == pytest.approx(by_m[m], abs=1e-14)
    assert sum(cell_projector_formula(coeffs, m) for m in range(4)) == pytest.approx(projection.delta)


def test_localization_predicate(prime_space):
    assert localization_predicate(fig3b(prime_space)) == (True, pytest.approx(0.5))
    localized, delta = localization_predicate(fig3a(prime_space))
    assert not localized
    assert delta < 1e-14


def test_trapped_profile_is_exact_on_tilde(tilde_space):
    state = case_ii(tilde_space)
    for current in iterate(state, 44):
        if current.t < 40:
            continue
        simulated = vertex_distribution(current)
        profile = trapped_profile(state, current.t)
        for vertex, value in profile.items():
            if vertex.cell != 0:
                continue
            assert simulated[vertex] == pytest.approx(value, abs=1e-10)


@pytest.mark.slow
def test_trapped_profile_on_chain():
    space = build_graph(GraphKind.C4_PRIME, 1005)
    state = fig3b(space)
    cell = [i for i, vertex in enumerate(space.vertices) if vertex.cell == 0]
    simulated = np.zeros(len(cell))
    predicted = np.zeros(len(cell))
    for current in iterate(state, 1000):
        if current.t <= 980:
            continue
        simulated += vertex_probabilities(current)[cell] / 20
        profile = trapped_profile(state, current.t)
        predicted += np.array([profile[space.vertices[i]] for i in cell]) / 20
    assert predicted.sum() == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(simulated, predicted, atol=0.03)
