"""Named initial states."""
from __future__ import annotations

import numpy as np

from src.cyclewalk.arc_graph import TAIL, ArcSpace, GraphKind, Vertex, WalkState, build_graph

PRESET_GRAPH = {
    "case-i": GraphKind.TILDE_C4,
    "case-ii": GraphKind.TILDE_C4,
    "fig3a": GraphKind.C4_PRIME,
    "fig3b": GraphKind.C4_PRIME,
    "uniform": GraphKind.C4_PRIME,
}


def case_i(space: ArcSpace) -> WalkState:
    """Walker at -1 heading into 0' (reflects 1/5, transmits 4/5)."""
    return WalkState.basis(space, space.arc_between(Vertex(-1, TAIL), Vertex(-2, TAIL)))


def case_ii(space: ArcSpace) -> WalkState:
    """Walker on |1> = (0', d) (reflects 9/20, keeps 1/2, transmits 1/20)."""
    return WalkState.basis(space, space.coin_arc(1))


def fig3a(space: ArcSpace) -> WalkState:
    """(|7> + |8> + |9>) / sqrt(3) in cell 0; no trapped mass."""
    return WalkState.from_coins(space, [0, 0, 0, 0, 0, 0, 0, 1, 1, 1]).normalized()


def fig3b(space: ArcSpace) -> WalkState:
    """(|3> + i|4>) / sqrt(2) in cell 0; trapped mass 1/2."""
    return WalkState.from_coins(space, [0, 0, 0, 1, 1j, 0, 0, 0, 0, 0]).normalized()


def uniform_states(space: ArcSpace) -> list[WalkState]:
    """The ten single-coin states of cell 0, averaged as an equal mixture."""
    return [WalkState.basis(space, space.coin_arc(coin)) for coin in range(10)]


_BUILDERS = {"case-i": case_i, "case-ii": case_ii, "fig3a": fig3a, "fig3b": fig3b}


def resolve_preset(name: str, radius: int) -> list[WalkState]:
    """Build the preset's window and its initial state(s).

    Returns a single-element list except for ``uniform``.
    """
    if name not in PRESET_GRAPH:
        raise ValueError(f"Unknown preset {name!r}; choose from {', '.join(PRESET_GRAPH)}")
    space = build_graph(PRESET_GRAPH[name], max(radius, 2))
    if name == "uniform":
        return uniform_states(space)
    return [_BUILDERS[name](space)]


def random_cell_state(space: ArcSpace, rng: np.random.Generator, cell: int = 0) -> WalkState:
    """Gaussian random normalized state on the ten coins of one cell."""
    raw = rng.normal(size=10) + 1j * rng.normal(size=10)
    return WalkState.from_coins(space, raw / np.linalg.norm(raw), cell=cell)
