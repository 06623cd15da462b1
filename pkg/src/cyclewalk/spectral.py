"""
Bloch analysis of the Grover walk on the periodic chain C4'.

The fundamental domain is one cell with vertices ordered (0', u, d, 0) and
the ten coin arcs |0>..|9>. With psi_hat(k) = sum_x exp(-ikx) psi(x), the
walk becomes the 10x10 matrix U(k) = S_k (2 A A^T - I), where A is the
arc/vertex isometry and S_k the flip with phase exp(+ik) on |9> and exp(-ik)
on |0>. Its spectrum is the lift of the three bands of the twisted random
walk P(k) through lambda -> lambda +- i sqrt(1 - lambda^2), plus the
constant eigenvalues 1, -1, i, -i of the cycle functionals.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.cyclewalk.arc_graph import COIN_ORIGIN, REVERSE_CELL_SHIFT, REVERSE_COIN, GraphKind, WalkState
from src.cyclewalk.errors import DegeneratePointError

logger = logging.getLogger("cyclewalk.spectral")

VERTEX_ORDER = ("0'", "u", "d", "0")
STATIONARY = np.array([3 / 10, 1 / 5, 1 / 5, 3 / 10])

A_COEF = 9 * np.sqrt(3) / (7 * np.sqrt(7))
GAMMA = np.sqrt(28 / 27)
BANDS = ((2 / 3, 1.0), (-1.0, -2 / 3), (-1 / 3, 1 / 3))

COIN_VERTEX = np.array([VERTEX_ORDER.index(o) for o in COIN_ORIGIN])
TRANSITION = np.array([1 / 3 if o in ("0", "0'") else 1 / 2 for o in COIN_ORIGIN])

# eigh returns ascending eigenvalues; bands are disjoint so the order is fixed
_BAND_COLUMN = (2, 0, 1)
DEGENERACY_TOLERANCE = 1e-14
CRITICAL_TOLERANCE = 1e-7
ARCCOS_SLACK = 1e-12


def _clamped_arccos(value: NDArray[np.float64]) -> NDArray[np.float64]:
    if np.any(np.abs(value) > 1 + ARCCOS_SLACK):
        raise ValueError("arccos argument outside [-1, 1]")
    return np.arccos(np.clip(value, -1.0, 1.0))


def _scalar_or_array(value: NDArray, like: ArrayLike):
    return float(value) if np.ndim(like) == 0 else value


@dataclass(frozen=True, eq=False)
class BlochRandomWalk:
    """Twisted random walk P(k) on the fundamental domain.

    Entry [v, w] is the probability of stepping from w to v, so columns sum
    to one at k = 0.
    """

    k: float
    matrix: NDArray[np.complex128]

    def symmetrized(self) -> NDArray[np.complex128]:
        """D^{-1/2} P D^{1/2}, Hermitian for every k."""
        root = np.sqrt(STATIONARY)
        return self.matrix * root[None, :] / root[:, None]

    def characteristic_polynomial(self) -> NDArray[np.complex128]:
        """Coefficients of det(lambda - P(k)), highest degree first."""
        return np.poly(self.matrix)

    def eigenvalues(self) -> NDArray[np.float64]:
        return np.linalg.eigvalsh(self.symmetrized())


def build_P(k: float) -> BlochRandomWalk:
    phase = np.exp(1j * k)
    matrix = np.array(
        [
            [0, 1 / 2, 1 / 2, phase / 3],
            [1 / 3, 0, 0, 1 / 3],
            [1 / 3, 0, 0, 1 / 3],
            [np.conj(phase) / 3, 1 / 2, 1 / 2, 0],
        ],
        dtype=np.complex128,
    )
    return BlochRandomWalk(k=float(k), matrix=matrix)


def arc_vertex_isometry() -> NDArray[np.float64]:
    """A with A delta_v = sum over arcs leaving v of sqrt(p(e)) delta_e."""
    isometry = np.zeros((10, 4))
    isometry[np.arange(10), COIN_VERTEX] = np.sqrt(TRANSITION)
    return isometry


def flip_phases(k: ArrayLike) -> NDArray[np.complex128]:
    """Phase of the twisted flip on each coin; shape (..., 10)."""
    k = np.asarray(k, dtype=np.float64)
    return np.exp(1j * k[..., None] * np.array(REVERSE_CELL_SHIFT))


def apply_flip(vectors: NDArray[np.complex128], k: ArrayLike) -> NDArray[np.complex128]:
    """S_k on coin vectors of shape (..., 10); k broadcasts against the leading axes."""
    return flip_phases(k) * vectors[..., list(REVERSE_COIN)]


def twisted_flip(k: float) -> NDArray[np.complex128]:
    return apply_flip(np.eye(10, dtype=np.complex128), k).T.copy()


def grover_coin() -> NDArray[np.float64]:
    isometry = arc_vertex_isometry()
    return 2 * isometry @ isometry.T - np.eye(10)


@dataclass(frozen=True, eq=False)
class BlochWalkOperator:
    k: float
    matrix: NDArray[np.complex128]

    def __matmul__(self, vector: NDArray[np.complex128]) -> NDArray[np.complex128]:
        return self.matrix @ vector

    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.linalg.eigvals(self.matrix)


def bloch_walk_matrix(k: float) -> BlochWalkOperator:
    return BlochWalkOperator(k=float(k), matrix=twisted_flip(k) @ grover_coin())


def fibre_random_walk(k: float) -> NDArray[np.complex128]:
    """A^T S_k A, the random walk seen by the lifted eigenvectors."""
    isometry = arc_vertex_isometry()
    return isometry.T @ twisted_flip(k) @ isometry


def _xi(j: int, k: ArrayLike) -> NDArray[np.float64]:
    k = np.asarray(k, dtype=np.float64)
    return _clamped_arccos(A_COEF * np.cos(k)) / 3 + 2 * j * np.pi / 3


def band_lambda(j: int, k: ArrayLike):
    """lambda_j(k), the j-th root of 9 lambda^3 - 7 lambda - 2 cos k."""
    if j not in (0, 1, 2):
        raise ValueError(f"Band index must be 0, 1 or 2, got {j}")
    return _scalar_or_array(GAMMA * np.cos(_xi(j, k)), k)


def spectral_map(lam: ArrayLike, l: int):
    """Walk eigenvalue lambda + (-1)^l i sqrt(1 - lambda^2)."""
    if l not in (0, 1):
        raise ValueError(f"Branch sign must be 0 or 1, got {l}")
    lam_array = np.asarray(lam, dtype=np.float64)
    if np.any(np.abs(lam_array) > 1 + ARCCOS_SLACK):
        raise ValueError(f"Random-walk eigenvalue outside [-1, 1]: {lam}")
    lam_array = np.clip(lam_array, -1.0, 1.0)
    nu = lam_array + (-1) ** l * 1j * np.sqrt(1 - lam_array**2)
    return complex(nu) if np.ndim(lam) == 0 else nu


def _fibre_vectors(k: NDArray[np.float64]) -> NDArray[np.complex128]:
    """Eigenvectors of A^T S_k A on the (u + d) sector; shape (N, 3 bands, 4)."""
    n = k.shape[0]
    reduced = np.zeros((n, 3, 3), dtype=np.complex128)
    third = 1 / np.sqrt(3)
    reduced[:, 0, 1] = reduced[:, 1, 0] = third
    reduced[:, 1, 2] = reduced[:, 2, 1] = third
    reduced[:, 0, 2] = np.exp(-1j * k) / 3
    reduced[:, 2, 0] = np.exp(1j * k) / 3
    _, vectors = np.linalg.eigh(reduced)

    lifted = np.empty((n, 3, 4), dtype=np.complex128)
    for j, column in enumerate(_BAND_COLUMN):
        g = vectors[:, :, column]
        lifted[:, j, 0] = g[:, 0]
        lifted[:, j, 1] = g[:, 1] / np.sqrt(2)
        lifted[:, j, 2] = g[:, 1] / np.sqrt(2)
        lifted[:, j, 3] = g[:, 2]
    return lifted


def _lift(k: NDArray[np.float64], fibre: NDArray[np.complex128], nu: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Af - nu S_k A f, normalized."""
    nu = np.asarray(nu)
    arcs = fibre @ arc_vertex_isometry().T
    vectors = arcs - nu[..., None] * apply_flip(arcs, k)
    norms = np.linalg.norm(vectors, axis=-1, keepdims=True)
    return vectors / np.where(norms > 0, norms, 1.0)


def walk_eigenvector(k: float, j: int, l: int) -> NDArray[np.complex128]:
    """Normalized eigenvector of U(k) for the walk eigenvalue nu_{j,l}(k).

    Raises:
        DegeneratePointError: At band edges where 1 - lambda^2 vanishes
    """
    lam = band_lambda(j, k)
    if 1 - lam**2 < DEGENERACY_TOLERANCE:
        raise DegeneratePointError(f"Band {j} touches +-1 at k={k!r}; the eigenvector lift vanishes")
    nu = spectral_map(lam, l)
    fibre = _fibre_vectors(np.array([k], dtype=np.float64))[0, j]
    return _lift(np.float64(k), fibre, np.complex128(nu))


def null_band_eigenvector(l: int) -> NDArray[np.complex128]:
    """Lift of the k-independent eigenvector (0, 1, -1, 0) of eigenvalue 0; walk eigenvalue +-i."""
    fibre = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)
    return _lift(np.float64(0.0), fibre, np.complex128(spectral_map(0.0, l)))


def _critical_side(k: NDArray[np.float64]) -> NDArray[np.float64]:
    wrapped = (k + np.pi) % (2 * np.pi) - np.pi
    return np.where(wrapped >= 0, 1.0, -1.0)


def velocity(j: int, l: int, k: ArrayLike):
    """x_{j,l}(k) = (-1)^l lambda_j'(k) / sqrt(1 - lambda_j(k)^2).

    At the critical points k = 0 (band 0) and k = -pi (band 1) the value is
    the one-sided limit from the right.
    """
    if l not in (0, 1):
        raise ValueError(f"Branch sign must be 0 or 1, got {l}")
    k_array = np.asarray(k, dtype=np.float64)
    xi = _xi(j, k_array)
    sign = (-1) ** l
    root = np.sqrt(np.clip(1 - GAMMA**2 * np.cos(xi) ** 2, 0.0, None))
    radial = np.sqrt(1 - (A_COEF * np.cos(k_array)) ** 2)
    critical = root < CRITICAL_TOLERANCE
    with np.errstate(divide="ignore", invalid="ignore"):
        x = -sign * 2 * np.sin(k_array) / (7 * radial) * np.sin(xi) / root
    if np.any(critical):
        if j == 0:
            limit = -sign * _critical_side(k_array) / np.sqrt(10)
        else:
            limit = sign * _critical_side(k_array + np.pi) / np.sqrt(10)
        x = np.where(critical, limit, x)
    return _scalar_or_array(x, k)


def curvature_factor(x: NDArray[np.float64]) -> NDArray[np.float64]:
    return -2 * x * (28 * x**2 + 33) / (9 * (4 * x**2 - 1) ** 3)


def velocity_derivative(j: int, l: int, k: ArrayLike):
    """dx_{j,l}/dk; vanishes at the critical points."""
    if l not in (0, 1):
        raise ValueError(f"Branch sign must be 0 or 1, got {l}")
    k_array = np.asarray(k, dtype=np.float64)
    cos_xi = np.cos(_xi(j, k_array))
    root = np.sqrt(np.clip(1 - GAMMA**2 * cos_xi**2, 0.0, None))
    derivative = -((-1) ** l) * (A_COEF / 21) * curvature_factor(cos_xi) * root
    return _scalar_or_array(derivative, k)


@dataclass(frozen=True, eq=False)
class BlochState:
    """Fourier transform of a finitely supported state on C4'."""

    cells: NDArray[np.int64]
    coefficients: NDArray[np.complex128]

    def __call__(self, k: ArrayLike) -> NDArray[np.complex128]:
        """psi_hat(k), shape (10,) for scalar k or (N, 10) for an array."""
        k_array = np.atleast_1d(np.asarray(k, dtype=np.float64))
        phases = np.exp(-1j * np.outer(k_array, self.cells))
        values = phases @ self.coefficients
        return values[0] if np.ndim(k) == 0 else values

    def plancherel_norm(self, grid: int = 4096) -> float:
        """(1/2pi) integral of |psi_hat|^2 by the midpoint rule."""
        values = self(midpoint_grid(grid))
        return float(np.mean(np.sum(np.abs(values) ** 2, axis=1)))


def fourier_initial(state: WalkState) -> BlochState:
    """psi_hat(k, c) = sum_x exp(-ikx) psi(x, c) for a state on C4'."""
    space = state.space
    if space.kind is not GraphKind.C4_PRIME:
        raise ValueError("Fourier transform is defined for c4-prime states only")
    support = np.flatnonzero(state.amplitudes)
    cells = np.unique(space.arc_cell[support])
    coefficients = np.zeros((len(cells), 10), dtype=np.complex128)
    rows = np.searchsorted(cells, space.arc_cell[support])
    coefficients[rows, space.arc_coin[support]] = state.amplitudes[support]
    return BlochState(cells=cells.astype(np.int64), coefficients=coefficients)


def midpoint_grid(n: int) -> NDArray[np.float64]:
    """n points k_i = -pi + (i + 1/2) 2pi/n; avoids 0, +-pi/2 and -pi for n divisible by 4."""
    if n < 4 or n % 4:
        raise ValueError(f"Grid size must be a positive multiple of 4, got {n}")
    return -np.pi + (np.arange(n) + 0.5) * (2 * np.pi / n)


def uniform_grid(n: int) -> NDArray[np.float64]:
    """n points k_i = -pi + 2 pi i / n, including -pi, 0 and +-pi/2 for n divisible by 4."""
    if n < 4 or n % 4:
        raise ValueError(f"Grid size must be a positive multiple of 4, got {n}")
    return -np.pi + np.arange(n) * (2 * np.pi / n)


@dataclass(frozen=True, eq=False)
class BranchTable:
    """All branch data on a midpoint k-grid.

    Arrays are indexed [j, l, i] (and a trailing coin axis for vectors).
    """

    k: NDArray[np.float64]
    lam: NDArray[np.float64]
    nu: NDArray[np.complex128]
    x: NDArray[np.float64]
    dxdk: NDArray[np.float64]
    vectors: NDArray[np.complex128]

    @property
    def size(self) -> int:
        return self.k.shape[0]


@lru_cache(maxsize=4)
def branch_table(grid: int) -> BranchTable:
    k = midpoint_grid(grid)
    lam = np.stack([band_lambda(j, k) for j in range(3)])
    nu = np.stack([[spectral_map(lam[j], l) for l in range(2)] for j in range(3)])
    x = np.stack([[velocity(j, l, k) for l in range(2)] for j in range(3)])
    dxdk = np.stack([[velocity_derivative(j, l, k) for l in range(2)] for j in range(3)])

    fibre = _fibre_vectors(k)  # (N, 3, 4)
    vectors = np.empty((3, 2, grid, 10), dtype=np.complex128)
    for j in range(3):
        for l in range(2):
            vectors[j, l] = _lift(k, fibre[:, j], nu[j, l])
    logger.info(f"Computed branch table on {grid} k-points")
    return BranchTable(k=k, lam=lam, nu=nu, x=x, dxdk=dxdk, vectors=vectors)


@dataclass(frozen=True)
class WalkSpectrum:
    """Spectrum of the walk on C4': three arcs of the circle plus four eigenvalues."""

    point: tuple[complex, ...] = (1, 1j, -1, -1j)
    bands: tuple[tuple[float, float], ...] = BANDS

    def contains(self, z: complex, tolerance: float = 1e-9) -> bool:
        """Whether z lies in the spectrum (up to tolerance)."""
        if abs(abs(z) - 1) > tolerance:
            return False
        if any(abs(z - p) <= tolerance for p in self.point):
            return True
        return any(low - tolerance <= z.real <= high + tolerance for low, high in self.bands)


def walk_spectrum_support() -> WalkSpectrum:
    return WalkSpectrum()


def expected_bloch_spectrum(k: float) -> NDArray[np.complex128]:
    """The ten eigenvalues of U(k): six band values and the four constant ones."""
    values = [spectral_map(band_lambda(j, k), l) for j in range(3) for l in range(2)]
    values += [1, 1j, -1, -1j]
    return np.array(values, dtype=np.complex128)
