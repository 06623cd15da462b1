"""
Arc spaces for the Grover walk on finite windows of the two 4-cycle graphs.

Two infinite graphs are supported:
1. ``tilde-c4``: one 4-cycle with a semi-infinite tail attached at 0' and at 0
2. ``c4-prime``: a Z-periodic chain of 4-cycles joined by bridges 0_j -- 0'_{j+1}

Windows are open truncations. Vertex degrees are always those of the infinite
graph, so a step is exact as long as no amplitude is pushed out of the window;
when that would happen a ``WindowOverflowError`` is raised instead.

Amplitude on arc (v, w) sits at v and arrived from w. One step is
``Psi'(f) = (C Psi)(reverse(f))`` with the Grover coin ``C`` acting on the arcs
sharing an origin.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from src.cyclewalk.errors import WindowOverflowError

logger = logging.getLogger("cyclewalk.arc_graph")

# Amplitude that may leave the window in one step before the step is refused
OVERFLOW_TOLERANCE = 1e-14

TAIL = "tail"
LOCAL_VERTICES = ("0'", "u", "d", "0")

# Fundamental coin labels |0>..|9>. Coins 0 and 9 leave the cell (tail or bridge).
COIN_ORIGIN = ("0'", "0'", "0'", "u", "u", "d", "d", "0", "0", "0")
COIN_TERMINUS = (None, "d", "u", "0'", "0", "0", "0'", "u", "d", None)
REVERSE_COIN = (9, 6, 3, 2, 7, 8, 1, 4, 5, 0)
# Cell offset of the reverse arc (coin 9 of cell j reverses to coin 0 of cell j+1)
REVERSE_CELL_SHIFT = (-1, 0, 0, 0, 0, 0, 0, 0, 0, 1)


class GraphKind(str, Enum):
    TILDE_C4 = "tilde-c4"
    C4_PRIME = "c4-prime"


class Vertex(NamedTuple):
    """A vertex of either graph.

    ``cell`` is the position label j used for X_t: the tail coordinate on
    C~4 (0 for the cycle) or the cell index on C4'.
    """

    cell: int
    local: str

    def label(self, kind: GraphKind) -> str:
        if self.local == TAIL:
            return str(self.cell)
        if kind is GraphKind.TILDE_C4:
            return self.local
        return f"{self.local}_{self.cell}"


class Arc(NamedTuple):
    index: int
    origin: Vertex
    terminus: Vertex
    reverse: int


@dataclass(frozen=True, eq=False)
class ArcSpace:
    """Immutable arc space of a finite window.

    Attributes:
        kind: Which infinite graph the window is cut from
        radius: Tail vertices per side (C~4) or cells per side (C4')
        vertices: Window vertices in index order
        arcs: Window arcs in index order
        origin: Vertex index of each arc's origin
        reverse: Arc index of each arc's reverse
        degree: Degree of each vertex in the infinite graph
        truncated: Indices of vertices missing some of their arcs in the window
    """

    kind: GraphKind
    radius: int
    vertices: tuple[Vertex, ...]
    arcs: tuple[Arc, ...]
    origin: NDArray[np.intp]
    reverse: NDArray[np.intp]
    degree: NDArray[np.int64]
    truncated: NDArray[np.intp]
    vertex_cell: NDArray[np.int64]
    arc_coin: NDArray[np.int64]
    _vertex_index: dict[Vertex, int] = field(repr=False)
    _arc_index: dict[tuple[Vertex, Vertex], int] = field(repr=False)
    _coin_index: dict[tuple[int, int], int] = field(repr=False)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def terminus(self) -> NDArray[np.intp]:
        return self.origin[self.reverse]

    @property
    def arc_degree(self) -> NDArray[np.float64]:
        """Degree of each arc's origin, as floats for the coin."""
        return self.degree[self.origin].astype(np.float64)

    @property
    def arc_cell(self) -> NDArray[np.int64]:
        return self.vertex_cell[self.origin]

    @property
    def cells(self) -> list[int]:
        """Cells carrying a full 4-cycle (only cell 0 on C~4)."""
        if self.kind is GraphKind.TILDE_C4:
            return [0]
        return list(range(-self.radius, self.radius + 1))

    def vertex_index(self, vertex: Vertex) -> int:
        try:
            return self._vertex_index[vertex]
        except KeyError:
            raise ValueError(f"Vertex {vertex} is not in the window") from None

    def arc_between(self, origin: Vertex, terminus: Vertex) -> int:
        """Index of the arc (origin, terminus)."""
        try:
            return self._arc_index[(origin, terminus)]
        except KeyError:
            raise ValueError(f"No arc ({origin}, {terminus}) in the window") from None

    def coin_arc(self, coin: int, cell: int = 0) -> int:
        """Index of fundamental arc |coin> in the given cell."""
        if not 0 <= coin <= 9:
            raise ValueError(f"Coin label must be in 0..9, got {coin}")
        try:
            return self._coin_index[(cell, coin)]
        except KeyError:
            raise ValueError(f"Coin |{coin}> of cell {cell} is not in the window") from None

    def coin_of(self, arc: int) -> tuple[int, int] | None:
        """(cell, coin) label of an arc, or None for tail arcs off the fundamental domain."""
        coin = int(self.arc_coin[arc])
        if coin < 0:
            return None
        return int(self.arc_cell[arc]), coin

    def label(self, vertex_index: int) -> str:
        return self.vertices[vertex_index].label(self.kind)


def _tilde_arcs(radius: int) -> tuple[list[Vertex], list[tuple[Vertex, Vertex, int | None]]]:
    hub_left = Vertex(0, "0'")
    hub_right = Vertex(0, "0")
    vertices = [Vertex(0, local) for local in LOCAL_VERTICES]
    vertices += [Vertex(j, TAIL) for j in range(-radius, 0)]
    vertices += [Vertex(j, TAIL) for j in range(1, radius + 1)]

    pairs: list[tuple[Vertex, Vertex, int | None]] = []
    for coin in range(10):
        origin = Vertex(0, COIN_ORIGIN[coin])
        if coin == 0:
            terminus = Vertex(-1, TAIL)
        elif coin == 9:
            terminus = Vertex(1, TAIL)
        else:
            terminus = Vertex(0, COIN_TERMINUS[coin])
        pairs.append((origin, terminus, coin))

    for side, hub in ((-1, hub_left), (1, hub_right)):
        pairs.append((Vertex(side, TAIL), hub, None))
        for n in range(1, radius):
            inner, outer = Vertex(side * n, TAIL), Vertex(side * (n + 1), TAIL)
            pairs.append((inner, outer, None))
            pairs.append((outer, inner, None))
    return vertices, pairs


def _prime_arcs(radius: int) -> tuple[list[Vertex], list[tuple[Vertex, Vertex, int | None]]]:
    vertices = [Vertex(j, local) for j in range(-radius, radius + 1) for local in LOCAL_VERTICES]
    pairs: list[tuple[Vertex, Vertex, int | None]] = []
    for j in range(-radius, radius + 1):
        for coin in range(10):
            if coin == 0:
                if j == -radius:
                    continue
                terminus = Vertex(j - 1, "0")
            elif coin == 9:
                if j == radius:
                    continue
                terminus = Vertex(j + 1, "0'")
            else:
                terminus = Vertex(j, COIN_TERMINUS[coin])
            pairs.append((Vertex(j, COIN_ORIGIN[coin]), terminus, coin))
    return vertices, pairs


def _infinite_degree(vertex: Vertex) -> int:
    return 3 if vertex.local in ("0", "0'") else 2


def build_graph(kind: GraphKind | str, radius: int) -> ArcSpace:
    """Build the arc space of a finite window.

    Args:
        kind: ``tilde-c4`` or ``c4-prime``
        radius: Tail vertices per side (C~4, at least 1) or cells per side
            around cell 0 (C4', 0 gives a single cell)

    Returns:
        ArcSpace with deterministic arc indexing. Fundamental arcs come first
        in coin order, cell by cell.

    Raises:
        ValueError: If the radius is out of range
    """
    kind = GraphKind(kind)
    minimum = 1 if kind is GraphKind.TILDE_C4 else 0
    if radius < minimum:
        raise ValueError(f"Window radius for {kind.value} must be >= {minimum}, got {radius}")

    if kind is GraphKind.TILDE_C4:
        vertices, pairs = _tilde_arcs(radius)
    else:
        vertices, pairs = _prime_arcs(radius)

    vertex_index = {v: i for i, v in enumerate(vertices)}
    arc_index = {(o, t): i for i, (o, t, _) in enumerate(pairs)}
    coin_index = {(o.cell, coin): i for i, (o, _, coin) in enumerate(pairs) if coin is not None}

    reverse = np.array([arc_index[(t, o)] for o, t, _ in pairs], dtype=np.intp)
    origin = np.array([vertex_index[o] for o, _, _ in pairs], dtype=np.intp)
    degree = np.array([_infinite_degree(v) for v in vertices], dtype=np.int64)
    window_degree = np.bincount(origin, minlength=len(vertices))
    truncated = np.flatnonzero(window_degree < degree).astype(np.intp)

    arcs = tuple(
        Arc(index=i, origin=o, terminus=t, reverse=int(reverse[i]))
        for i, (o, t, _) in enumerate(pairs)
    )
    logger.debug(f"Built {kind.value} window radius={radius}: {len(arcs)} arcs, {len(vertices)} vertices")

    return ArcSpace(
        kind=kind,
        radius=radius,
        vertices=tuple(vertices),
        arcs=arcs,
        origin=origin,
        reverse=reverse,
        degree=degree,
        truncated=truncated,
        vertex_cell=np.array([v.cell for v in vertices], dtype=np.int64),
        arc_coin=np.array([-1 if coin is None else coin for _, _, coin in pairs], dtype=np.int64),
        _vertex_index=vertex_index,
        _arc_index=arc_index,
        _coin_index=coin_index,
    )


def required_radius(t_max: int, support_radius: int) -> int:
    """Smallest window radius that cannot overflow within ``t_max`` steps."""
    return t_max + support_radius + 2


def grover_matrix_element(space: ArcSpace, f: int, e: int) -> float:
    """Matrix element <delta_f, U delta_e> of the Grover walk."""
    if space.origin[e] != space.terminus[f]:
        return 0.0
    return 2.0 / space.degree[space.origin[e]] - (1.0 if e == space.reverse[f] else 0.0)


def evolution_matrix(space: ArcSpace) -> NDArray[np.float64]:
    """Dense real matrix of U on the window; small windows only."""
    n = space.n_arcs
    matrix = np.zeros((n, n))
    terminus = space.terminus
    for f in range(n):
        for e in np.flatnonzero(space.origin == terminus[f]):
            matrix[f, e] = grover_matrix_element(space, f, int(e))
    return matrix


def vertex_sums(space: ArcSpace, amplitudes: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Sum of amplitudes over the arcs leaving each vertex."""
    real = np.bincount(space.origin, weights=amplitudes.real, minlength=space.n_vertices)
    imag = np.bincount(space.origin, weights=amplitudes.imag, minlength=space.n_vertices)
    return real + 1j * imag


def step_amplitudes(space: ArcSpace, amplitudes: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """One Grover step on a raw amplitude vector.

    Raises:
        WindowOverflowError: If the step would send amplitude out of the window
    """
    sums = vertex_sums(space, amplitudes)
    if space.truncated.size:
        # amplitude sent along each missing arc of a truncated vertex
        leak = np.abs(2.0 * sums[space.truncated] / space.degree[space.truncated])
        worst = float(leak.max())
        if worst > OVERFLOW_TOLERANCE:
            raise WindowOverflowError(worst)
    coined = 2.0 * sums[space.origin] / space.arc_degree - amplitudes
    return coined[space.reverse]


@dataclass(frozen=True, eq=False)
class WalkState:
    """Complex amplitudes over the arcs of a window at time ``t``."""

    space: ArcSpace
    amplitudes: NDArray[np.complex128]
    t: int = 0

    def __post_init__(self):
        if self.amplitudes.shape != (self.space.n_arcs,):
            raise ValueError(
                f"Amplitude vector has shape {self.amplitudes.shape}, expected ({self.space.n_arcs},)"
            )

    @classmethod
    def basis(cls, space: ArcSpace, arc: int) -> "WalkState":
        amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
        amplitudes[arc] = 1.0
        return cls(space, amplitudes)

    @classmethod
    def from_coins(cls, space: ArcSpace, coefficients: Sequence[complex], cell: int = 0) -> "WalkState":
        """State with amplitude ``coefficients[c]`` on coin |c> of one cell."""
        if len(coefficients) != 10:
            raise ValueError(f"Expected 10 coin coefficients, got {len(coefficients)}")
        amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
        for coin, value in enumerate(coefficients):
            if value != 0:
                amplitudes[space.coin_arc(coin, cell)] = value
        return cls(space, amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "WalkState":
        norm = self.norm
        if norm == 0:
            raise ValueError("Cannot normalize the zero state")
        return WalkState(self.space, self.amplitudes / norm, self.t)

    @property
    def support_radius(self) -> int:
        """Largest |cell| carrying nonzero amplitude."""
        nonzero = np.flatnonzero(self.amplitudes)
        if nonzero.size == 0:
            return 0
        return int(np.abs(self.space.arc_cell[nonzero]).max())


def apply_evolution(space: ArcSpace, state: WalkState) -> WalkState:
    """Apply one step of the Grover walk.

    Raises:
        WindowOverflowError: With ``step`` set to the time index being produced
    """
    if state.space is not space:
        raise ValueError("State does not belong to this arc space")
    try:
        amplitudes = step_amplitudes(space, state.amplitudes)
    except WindowOverflowError as e:
        raise e.at_step(state.t + 1) from None
    return WalkState(space, amplitudes, state.t + 1)


def parse_vertex(kind: GraphKind | str, label: str) -> Vertex:
    """Vertex from its printed label.

    C~4 labels are ``0'``, ``u``, ``d``, ``0`` or a nonzero tail coordinate;
    C4' labels are ``<local>_<cell>`` such as ``u_-2``.
    """
    kind = GraphKind(kind)
    label = str(label).strip()
    if kind is GraphKind.TILDE_C4:
        if label in LOCAL_VERTICES:
            return Vertex(0, label)
        try:
            position = int(label)
        except ValueError:
            raise ValueError(f"Unknown tilde-c4 vertex label {label!r}") from None
        if position == 0:
            raise ValueError("Tail coordinate 0 is the cycle; use 0', u, d or 0")
        return Vertex(position, TAIL)

    local, sep, cell = label.rpartition("_")
    if not sep or local not in LOCAL_VERTICES:
        raise ValueError(f"Unknown c4-prime vertex label {label!r}; expected <local>_<cell>")
    try:
        return Vertex(int(cell), local)
    except ValueError:
        raise ValueError(f"Bad cell index in vertex label {label!r}") from None
