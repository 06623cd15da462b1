"""
Homological eigenvectors of the Grover walk.

For a closed path c = (e_1, ..., e_n) the vector
w_m(c) = sum_j exp(2 pi i m j / n) delta_{e_j} gives, after subtracting the
same functional of the reversed path, an eigenvector of U with eigenvalue
i^m when c is a 4-cycle. The normalized vectors of all cells form an
orthonormal family; the squared projection of the initial state on it is the
trapped mass Delta.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from src.cyclewalk.arc_graph import REVERSE_COIN, ArcSpace, GraphKind, Vertex, WalkState
from src.cyclewalk.errors import InvalidPathError
from src.cyclewalk.evolution import LemmaCoefficients

logger = logging.getLogger("cyclewalk.homology")

# Coins of the cycle 0' -> u -> 0 -> d -> 0'
CYCLE_COINS = (2, 4, 8, 6)
LOCALIZATION_TOLERANCE = 1e-12


def _phases(m: int, n: int) -> NDArray[np.complex128]:
    j = np.arange(1, n + 1)
    return np.exp(2j * np.pi * m * j / n)


def cycle_path(space: ArcSpace, cell: int = 0) -> tuple[int, ...]:
    return tuple(space.coin_arc(coin, cell) for coin in CYCLE_COINS)


def reverse_path(space: ArcSpace, path: Sequence[int]) -> tuple[int, ...]:
    """Reverse the arc order and each arc."""
    return tuple(int(space.reverse[e]) for e in reversed(path))


def path_functional(space: ArcSpace, path: Sequence[int], m: int) -> NDArray[np.complex128]:
    """w_m(p) for a closed path given as arc indices.

    Raises:
        InvalidPathError: If the arcs are not consecutive or the path is open
    """
    if not path:
        raise InvalidPathError("Path must contain at least one arc")
    terminus = space.terminus
    for position, (e, nxt) in enumerate(zip(path, list(path[1:]) + [path[0]])):
        if not (0 <= e < space.n_arcs and 0 <= nxt < space.n_arcs):
            raise InvalidPathError(f"Arc index out of range at position {position}")
        if terminus[e] != space.origin[nxt]:
            raise InvalidPathError(
                f"Arcs {e} and {nxt} are not consecutive (terminus "
                f"{space.label(terminus[e])} != origin {space.label(space.origin[nxt])})"
            )
    vector = np.zeros(space.n_arcs, dtype=np.complex128)
    np.add.at(vector, np.asarray(path), _phases(m, len(path)))
    return vector


@dataclass(frozen=True, eq=False)
class CycleFunctional:
    """Normalized (w_m(c) - w_m(c reversed)) / sqrt(8) of the cycle in one cell.

    Stored sparsely: the eight arcs of the cycle and its reverse, with their
    values. ``cell`` is None on C~4, which has a single cycle.
    """

    m: int
    cell: int | None
    arcs: NDArray[np.intp]
    values: NDArray[np.complex128]
    n_arcs: int

    @property
    def eigenvalue(self) -> complex:
        return 1j**self.m

    @property
    def vector(self) -> NDArray[np.complex128]:
        dense = np.zeros(self.n_arcs, dtype=np.complex128)
        dense[self.arcs] = self.values
        return dense


def cycle_functional(space: ArcSpace, m: int, cell: int = 0) -> CycleFunctional:
    if m not in range(4):
        raise ValueError(f"m must be in 0..3, got {m}")
    path = cycle_path(space, cell)
    phases = _phases(m, len(path))
    arcs = np.asarray(path + reverse_path(space, path), dtype=np.intp)
    values = np.concatenate([phases, -phases]) / np.sqrt(8)
    label = None if space.kind is GraphKind.TILDE_C4 else cell
    return CycleFunctional(m=m, cell=label, arcs=arcs, values=values, n_arcs=space.n_arcs)


def coin_functional(m: int) -> NDArray[np.complex128]:
    """The cell functional for eigenvalue i^m in coin coordinates |0>..|9>."""
    vector = np.zeros(10, dtype=np.complex128)
    reversed_coins = [REVERSE_COIN[c] for c in reversed(CYCLE_COINS)]
    phases = _phases(m, 4)
    vector[list(CYCLE_COINS)] += phases
    vector[reversed_coins] -= phases
    return vector / np.sqrt(8)


@dataclass(frozen=True, eq=False)
class HomologyBasis:
    space: ArcSpace
    functionals: tuple[CycleFunctional, ...]

    def __len__(self) -> int:
        return len(self.functionals)

    def __iter__(self):
        return iter(self.functionals)

    def matrix(self) -> NDArray[np.complex128]:
        """Columns are the basis vectors; dense, so meant for small windows."""
        return np.stack([f.vector for f in self.functionals], axis=1)

    def overlaps(self, amplitudes: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """<eta, psi> for every functional, without densifying."""
        arcs = np.stack([f.arcs for f in self.functionals])
        values = np.stack([f.values for f in self.functionals])
        return np.einsum("fa,fa->f", values.conj(), amplitudes[arcs])

    def combine(self, coefficients: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """sum_f coefficients[f] eta_f as a dense arc vector."""
        vector = np.zeros(self.space.n_arcs, dtype=np.complex128)
        for f, c in zip(self.functionals, coefficients):
            np.add.at(vector, f.arcs, c * f.values)
        return vector


@lru_cache(maxsize=16)
def homology_basis(space: ArcSpace) -> HomologyBasis:
    functionals = tuple(cycle_functional(space, m, cell) for cell in space.cells for m in range(4))
    return HomologyBasis(space=space, functionals=functionals)


@dataclass(frozen=True)
class Overlap:
    m: int
    cell: int
    amplitude: complex
    weight: float


@dataclass(frozen=True)
class HomologicalProjection:
    overlaps: tuple[Overlap, ...]
    delta: float

    def as_dict(self) -> dict:
        return {
            "delta": self.delta,
            "overlaps": [{"m": o.m, "cell": o.cell, "weight": o.weight} for o in self.overlaps],
            "localized": self.delta > LOCALIZATION_TOLERANCE,
        }


def homological_projection(state: WalkState) -> HomologicalProjection:
    """Overlaps <eta_{m;j}, Psi_0> for every cell in the window and their total Delta."""
    basis = homology_basis(state.space)
    amplitudes = basis.overlaps(state.amplitudes)
    weights = np.abs(amplitudes) ** 2
    overlaps = tuple(
        Overlap(m=f.m, cell=f.cell if f.cell is not None else 0, amplitude=complex(a), weight=float(w))
        for f, a, w in zip(basis, amplitudes, weights)
    )
    delta = float(weights.sum())
    logger.debug(f"Homological projection: delta={delta:.15g}")
    return HomologicalProjection(overlaps=overlaps, delta=delta)


def gram_projection_norm(state: WalkState) -> float:
    """|Pi Psi_0|^2 by least squares on the unnormalized cycle vectors."""
    space = state.space
    columns = []
    for cell in space.cells:
        path = cycle_path(space, cell)
        back = reverse_path(space, path)
        for m in range(4):
            columns.append(path_functional(space, path, m) - path_functional(space, back, m))
    span = np.stack(columns, axis=1)
    coefficients, *_ = np.linalg.lstsq(span, state.amplitudes, rcond=None)
    return float(np.linalg.norm(span @ coefficients) ** 2)


def localization_predicate(state: WalkState, tolerance: float = LOCALIZATION_TOLERANCE) -> tuple[bool, float]:
    """Whether the initial state localizes, with its trapped mass."""
    delta = homological_projection(state).delta
    return delta > tolerance, delta


def cell_projector_formula(coeffs: LemmaCoefficients, m: int) -> float:
    """|<eta_m, Psi_0>|^2 on C~4 written in the fundamental amplitudes."""
    if m not in range(4):
        raise ValueError(f"m must be in 0..3, got {m}")
    a = coeffs
    phase = (-1j) ** m
    total = (a[2] - a[1]) + phase * (a[4] - a[5]) + phase**2 * (a[8] - a[7]) + phase**3 * (a[6] - a[3])
    return abs(total) ** 2 / 8


def trapped_profile(state: WalkState, n: int) -> dict[Vertex, float]:
    """Vertex distribution at time n of the trapped component of the initial state.

    The trapped component evolves as sum_m i^{mn} Pi_m Psi_0, which is the
    large-time behaviour of mu_n on the cycles.
    """
    space = state.space
    basis = homology_basis(space)
    overlaps = basis.overlaps(state.amplitudes)
    phases = np.array([1j ** ((f.m * n) % 4) for f in basis])
    trapped = basis.combine(phases * overlaps)
    probabilities = np.bincount(space.origin, weights=np.abs(trapped) ** 2, minlength=space.n_vertices)
    return {vertex: float(p) for vertex, p in zip(space.vertices, probabilities)}
