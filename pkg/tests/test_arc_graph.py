import numpy as np
import pytest

from src.cyclewalk.arc_graph import (
    REVERSE_COIN,
    TAIL,
    GraphKind,
    Vertex,
    WalkState,
    apply_evolution,
    build_graph,
    evolution_matrix,
    grover_matrix_element,
    parse_vertex,
    required_radius,
    step_amplitudes,
)
from src.cyclewalk.errors import WindowOverflowError


@pytest.mark.parametrize("radius, arcs", [(1, 12), (2, 16), (5, 28)])
def test_tilde_arc_count(radius, arcs):
    assert build_graph(GraphKind.TILDE_C4, radius).n_arcs == arcs


@pytest.mark.parametrize("radius", [0, 1, 4])
def test_prime_arc_count(radius):
    space = build_graph("c4-prime", radius)
    assert space.n_arcs == 10 * (2 * radius + 1) - 2
    assert space.n_vertices == 4 * (2 * radius + 1)


def test_radius_out_of_range():
    with pytest.raises(ValueError):
        build_graph(GraphKind.TILDE_C4, 0)
    with pytest.raises(ValueError):
        build_graph(GraphKind.C4_PRIME, -1)


def test_reverse_is_fixed_point_free_involution(prime_space):
    reverse = prime_space.reverse
    np.testing.assert_array_equal(reverse[reverse], np.arange(prime_space.n_arcs))
    assert np.all(reverse != np.arange(prime_space.n_arcs))


def test_reverse_coin_labels(prime_space):
    for coin in range(1, 9):
        assert prime_space.reverse[prime_space.coin_arc(coin)] == prime_space.coin_arc(REVERSE_COIN[coin])
    assert prime_space.reverse[prime_space.coin_arc(9, 0)] == prime_space.coin_arc(0, 1)
    assert prime_space.coin_of(prime_space.coin_arc(7, -2)) == (-2, 7)


def test_infinite_degrees(tilde_space):
    for local, degree in (("0'", 3), ("u", 2), ("d", 2), ("0", 3)):
        assert tilde_space.degree[tilde_space.vertex_index(Vertex(0, local))] == degree
    assert tilde_space.degree[tilde_space.vertex_index(Vertex(-7, TAIL))] == 2


def test_matrix_element_rule(tilde_space):
    e = tilde_space.coin_arc(1)  # (0', d)
    assert grover_matrix_element(tilde_space, tilde_space.coin_arc(6), e) == pytest.approx(-1 / 3)
    assert grover_matrix_element(tilde_space, tilde_space.coin_arc(3), e) == pytest.approx(2 / 3)
    assert grover_matrix_element(tilde_space, tilde_space.coin_arc(5), e) == 0.0


def test_tail_moves_outward(tilde_space):
    start = tilde_space.arc_between(Vertex(2, TAIL), Vertex(1, TAIL))
    state = apply_evolution(tilde_space, WalkState.basis(tilde_space, start))
    target = tilde_space.arc_between(Vertex(3, TAIL), Vertex(2, TAIL))
    assert state.t == 1
    assert abs(state.amplitudes[target]) == pytest.approx(1.0)


def test_tail_enters_cycle(tilde_space):
    start = tilde_space.arc_between(Vertex(1, TAIL), Vertex(2, TAIL))
    state = apply_evolution(tilde_space, WalkState.basis(tilde_space, start))
    assert abs(state.amplitudes[tilde_space.coin_arc(9)]) == pytest.approx(1.0)


def test_dense_matrix_agrees_with_step(rng):
    space = build_graph(GraphKind.C4_PRIME, 2)
    amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
    inner = np.flatnonzero(np.abs(space.arc_cell) <= 1)
    amplitudes[inner] = rng.normal(size=inner.size) + 1j * rng.normal(size=inner.size)
    np.testing.assert_allclose(evolution_matrix(space) @ amplitudes, step_amplitudes(space, amplitudes), atol=1e-13)


def test_step_preserves_norm(rng, prime_space):
    coefficients = rng.normal(size=10) + 1j * rng.normal(size=10)
    state = WalkState.from_coins(prime_space, coefficients / np.linalg.norm(coefficients))
    for _ in range(2):
        state = apply_evolution(prime_space, state)
    assert state.norm == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("kind, radius", [(GraphKind.TILDE_C4, 4), (GraphKind.C4_PRIME, 2)])
def test_evolution_matrix_is_orthogonal_away_from_boundary(kind, radius):
    space = build_graph(kind, radius)
    matrix = evolution_matrix(space)
    rows = matrix[~np.isin(space.terminus, space.truncated)]
    columns = matrix[:, ~np.isin(space.origin, space.truncated)]
    np.testing.assert_allclose(rows @ rows.T, np.eye(rows.shape[0]), atol=1e-14)
    np.testing.assert_allclose(columns.T @ columns, np.eye(columns.shape[1]), atol=1e-14)


@pytest.mark.parametrize("degree", [2, 3])
def test_grover_coin_rows_are_unit_vectors(tilde_space, degree):
    full = ~np.isin(np.arange(tilde_space.n_vertices), tilde_space.truncated)
    vertex = int(np.flatnonzero((tilde_space.degree == degree) & full)[0])
    arriving = np.flatnonzero(tilde_space.terminus == vertex)
    leaving = np.flatnonzero(tilde_space.origin == vertex)
    coin = np.array([[grover_matrix_element(tilde_space, int(f), int(e)) for e in leaving] for f in arriving])
    np.testing.assert_allclose(coin @ coin.T, np.eye(degree), atol=1e-15)


def test_overflow_reports_step():
    space = build_graph(GraphKind.TILDE_C4, 1)
    outward = space.arc_between(Vertex(-1, TAIL), Vertex(0, "0'"))
    with pytest.raises(WindowOverflowError) as info:
        apply_evolution(space, WalkState.basis(space, outward))
    assert info.value.step == 1
    assert info.value.amplitude == pytest.approx(1.0)


def test_required_radius():
    assert required_radius(10, 2) == 14


def test_support_radius(prime_space):
    assert WalkState.basis(prime_space, prime_space.coin_arc(3, -2)).support_radius == 2


@pytest.mark.parametrize(
    "kind, label, vertex",
    [
        ("tilde-c4", "0'", Vertex(0, "0'")),
        ("tilde-c4", "-3", Vertex(-3, TAIL)),
        ("c4-prime", "u_-2", Vertex(-2, "u")),
        ("c4-prime", "0'_1", Vertex(1, "0'")),
    ],
)
def test_parse_vertex(kind, label, vertex):
    assert parse_vertex(kind, label) == vertex


@pytest.mark.parametrize("kind, label", [("tilde-c4", "x"), ("c4-prime", "u"), ("c4-prime", "q_1")])
def test_parse_vertex_rejects(kind, label):
    with pytest.raises(ValueError):
        parse_vertex(kind, label)
