"""
Weak limit of X_t / t on C4'.

The limit law is Delta delta_0 plus a density assembled from the six
continuous branches. Everything is computed in the k-picture on a midpoint
grid: each grid point carries probability w_{j,l}(k) / N at velocity
x_{j,l}(k), so the CDF and moments need no inversion of x(k). The density
curves pair branches that share a velocity:

    rho_0^(l): (w_{0,l}(k) + w_{1,1-l}(k - pi)) / (2 pi |dx_0/dk|), k in [0, 2pi)
    rho_1^(l): (w_{2,l}(k) + w_{2,l}(pi - k)) / (2 pi |dx_2/dk|),   k in [-pi/2, pi/2)
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.cyclewalk.arc_graph import WalkState
from src.cyclewalk.errors import QuadratureError
from src.cyclewalk.homology import coin_functional, homological_projection
from src.cyclewalk.settings import DEFAULT_GRID
from src.cyclewalk.spectral import (
    A_COEF,
    GAMMA,
    BANDS,
    BlochState,
    BranchTable,
    curvature_factor,
    branch_table,
    fourier_initial,
    velocity,
    velocity_derivative,
    walk_eigenvector,
)

logger = logging.getLogger("cyclewalk.density")

OUTER_EDGE = 1 / np.sqrt(10)
INNER_EDGE = 2 / 7
MASS_REFINE_TOLERANCE = 1e-6
MASS_FAIL_TOLERANCE = 1e-4
MAX_REFINEMENTS = 2


@dataclass(frozen=True, eq=False)
class DensityCurve:
    """Samples (x, rho) of one density branch, ordered by the parameter k."""

    branch: str
    k: NDArray[np.float64]
    x: NDArray[np.float64]
    rho: NDArray[np.float64]
    mass: float
    support: tuple[float, float]

    def clip(self, percentile: float = 99.9) -> float:
        """Plot ceiling for rho, which diverges at the support edges."""
        return float(np.percentile(self.rho, percentile))


@dataclass(frozen=True, eq=False)
class LimitLaw:
    """Delta delta_0 plus the continuous part, with point masses per k-sample."""

    delta: float
    curves: tuple[DensityCurve, ...]
    grid: int
    sorted_x: NDArray[np.float64]
    cumulative: NDArray[np.float64]

    @property
    def continuous_mass(self) -> float:
        return float(self.cumulative[-1])

    @property
    def total_mass(self) -> float:
        return self.delta + self.continuous_mass

    def cdf(self, x: ArrayLike):
        """P(X <= x) for the limit law."""
        x_array = np.asarray(x, dtype=np.float64)
        below = self.cumulative[np.searchsorted(self.sorted_x, x_array, side="right")]
        values = self.delta * (x_array >= 0) + below
        return float(values) if np.ndim(x) == 0 else values

    def moment(self, r: int) -> float:
        if r < 0:
            raise ValueError(f"Moment order must be non-negative, got {r}")
        masses = np.diff(self.cumulative)
        return (self.delta if r == 0 else 0.0) + float(np.sum(self.sorted_x**r * masses))


def branch_weights(table: BranchTable, bloch: BlochState) -> NDArray[np.float64]:
    """w_{j,l}(k_i) = |<v_{j,l}(k_i), psi_hat(k_i)>|^2 on the table grid; shape (3, 2, N)."""
    values = bloch(table.k)
    overlaps = np.einsum("jlnc,nc->jln", table.vectors.conj(), values)
    return np.abs(overlaps) ** 2


def _evaluate(psi_hat: BlochState | Callable | NDArray, k: float) -> NDArray[np.complex128]:
    if callable(psi_hat):
        return np.asarray(psi_hat(k), dtype=np.complex128)
    return np.asarray(psi_hat, dtype=np.complex128)


def branch_weight(j: int, l: int, k: float, psi_hat: BlochState | Callable | NDArray) -> float:
    """|<v_{j,l}(k), psi_hat(k)>|^2; independent of the eigenvector phase.

    Raises:
        DegeneratePointError: At band edges
    """
    vector = walk_eigenvector(k, j, l)
    return float(abs(np.vdot(vector, _evaluate(psi_hat, k))) ** 2)


def point_weight(k: float, psi_hat: BlochState | Callable | NDArray) -> float:
    """Weight of psi_hat(k) on the four constant eigenvectors."""
    values = _evaluate(psi_hat, k)
    return float(sum(abs(np.vdot(coin_functional(m), values)) ** 2 for m in range(4)))


def _curves(table: BranchTable, weights: NDArray[np.float64]) -> tuple[DensityCurve, ...]:
    n = table.size
    half, quarter = n // 2, n // 4
    tau = np.abs(table.dxdk[:, 0])

    outer = np.concatenate([np.arange(half, n), np.arange(0, half)])
    outer_partner = (outer + half) % n
    outer_k = np.where(table.k[outer] < 0, table.k[outer] + 2 * np.pi, table.k[outer])

    inner = np.arange(quarter, 3 * quarter)
    inner_partner = (half - 1 - inner) % n

    curves = []
    for l in range(2):
        paired = weights[0, l, outer] + weights[1, 1 - l, outer_partner]
        curves.append(
            DensityCurve(
                branch=f"rho_0_{l}",
                k=outer_k,
                x=table.x[0, l, outer],
                rho=paired / (2 * np.pi * tau[0, outer]),
                mass=float(paired.sum() / n),
                support=(-OUTER_EDGE, OUTER_EDGE),
            )
        )
    for l in range(2):
        paired = weights[2, l, inner] + weights[2, l, inner_partner]
        curves.append(
            DensityCurve(
                branch=f"rho_1_{l}",
                k=table.k[inner],
                x=table.x[2, l, inner],
                rho=paired / (2 * np.pi * tau[2, inner]),
                mass=float(paired.sum() / n),
                support=(-INNER_EDGE, INNER_EDGE),
            )
        )
    return tuple(curves)


def _law(table: BranchTable, weights: NDArray[np.float64], delta: float) -> LimitLaw:
    flat_x = table.x.ravel()
    order = np.argsort(flat_x, kind="stable")
    masses = weights.ravel()[order] / table.size
    return LimitLaw(
        delta=delta,
        curves=_curves(table, weights),
        grid=table.size,
        sorted_x=flat_x[order],
        cumulative=np.concatenate([[0.0], np.cumsum(masses)]),
    )


def _mixture(states: Sequence[WalkState], grid: int) -> LimitLaw:
    table = branch_table(grid)
    weights = np.zeros((3, 2, grid))
    delta = 0.0
    for state in states:
        weights += branch_weights(table, fourier_initial(state))
        delta += homological_projection(state).delta
    count = len(states)
    return _law(table, weights / count, delta / count)


def parametric_curves(state: WalkState | Sequence[WalkState], grid: int = DEFAULT_GRID) -> LimitLaw:
    """Limit law of X_t / t for a finitely supported state, or an equal mixture of states.

    The grid is doubled while Delta + continuous mass misses 1 by more than
    1e-6.

    Raises:
        QuadratureError: If the mass identity still fails by more than 1e-4
    """
    states = [state] if isinstance(state, WalkState) else list(state)
    if not states:
        raise ValueError("At least one initial state is required")

    law = _mixture(states, grid)
    for _ in range(MAX_REFINEMENTS):
        if abs(law.total_mass - 1) <= MASS_REFINE_TOLERANCE:
            break
        grid *= 2
        logger.warning(f"Mass identity off by {law.total_mass - 1:.3e}; refining to {grid} k-points")
        law = _mixture(states, grid)

    deficit = law.total_mass - 1
    if abs(deficit) > MASS_FAIL_TOLERANCE:
        raise QuadratureError(f"Mass identity off by {deficit:.3e} on {grid} k-points; refine the grid")
    logger.info(f"Limit law: delta={law.delta:.12g} continuous={law.continuous_mass:.12g}")
    return law


def limit_cdf(law: LimitLaw, x: ArrayLike):
    return law.cdf(x)


def limit_moment(state: WalkState | Sequence[WalkState], r: int, grid: int = DEFAULT_GRID) -> float:
    """lim E[(X_t / t)^r]."""
    return parametric_curves(state, grid).moment(r)


@dataclass(frozen=True, eq=False)
class UniformLaw:
    delta: float
    outer: DensityCurve
    inner: DensityCurve


def uniform_initial_curves(grid: int = DEFAULT_GRID) -> UniformLaw:
    """Limit law averaged over the ten single-coin states of one cell.

    Delta = 2/5; the continuous part is 3/5 (nu_0 + nu_1) with
    nu = 1 / (3 pi |dx/dk|), where nu_0 has mass 2/3 and nu_1 mass 1/3.
    """
    table = branch_table(grid)
    n = table.size
    half, quarter = n // 2, n // 4
    outer = np.concatenate([np.arange(half, n), np.arange(0, half)])
    inner = np.arange(quarter, 3 * quarter)
    tau = np.abs(table.dxdk[:, 0])
    step = 2 * np.pi / n

    nu0 = DensityCurve(
        branch="nu_0",
        k=np.where(table.k[outer] < 0, table.k[outer] + 2 * np.pi, table.k[outer]),
        x=table.x[0, 0, outer],
        rho=1 / (3 * np.pi * tau[0, outer]),
        mass=len(outer) * step / (3 * np.pi),
        support=(-OUTER_EDGE, OUTER_EDGE),
    )
    nu1 = DensityCurve(
        branch="nu_1",
        k=table.k[inner],
        x=table.x[2, 0, inner],
        rho=1 / (3 * np.pi * tau[2, inner]),
        mass=len(inner) * step / (3 * np.pi),
        support=(-INNER_EDGE, INNER_EDGE),
    )
    return UniformLaw(delta=2 / 5, outer=nu0, inner=nu1)


def parametrized_point(lam: ArrayLike) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """(|x|, rho) of the uniform-initial density written in the random-walk eigenvalue lambda.

    rho here is 27 pi / 7 times the k-parametrized 1 / (3 pi |dx/dk|).
    """
    lam = np.asarray(lam, dtype=np.float64)
    theta = np.arccos(lam / GAMMA)
    eta = (A_COEF**2 - np.cos(3 * theta) ** 2) / (9 * np.sin(3 * theta) ** 2)
    x = np.sqrt((GAMMA**2 - lam**2) * eta / (1 - lam**2))
    rho = 7 * np.sqrt(21) / (np.abs(curvature_factor(lam / GAMMA)) * np.sqrt(1 - lam**2))
    return x, rho


@dataclass(frozen=True)
class ParametrizationCheck:
    scale: float
    expected_scale: float
    max_deviation: float
    max_x_deviation: float
    samples: int


def lambda_parametrization_check(samples: int = 200, margin: float = 1e-3) -> ParametrizationCheck:
    """Compare the lambda-parametrized density with the k-parametrized one.

    Returns the fitted ratio rho_k / rho_lambda (expected 7 / (27 pi)), the
    largest relative deviation from it and the largest |x| mismatch.
    """
    per_band = -(-samples // 3)
    per_band += per_band % 2

    ratios, x_errors = [], []
    for j, (low, high) in enumerate(BANDS):
        span = high - low - 2 * margin
        lam = low + margin + (np.arange(per_band) + 0.5) * span / per_band
        k = np.arccos(np.clip((9 * lam**3 - 7 * lam) / 2, -1.0, 1.0))
        x_k = np.abs(velocity(j, 0, k))
        rho_k = 1 / (3 * np.pi * np.abs(velocity_derivative(j, 0, k)))
        x_lam, rho_lam = parametrized_point(lam)
        ratios.append(rho_k / rho_lam)
        x_errors.append(np.abs(x_k - x_lam))

    ratio = np.concatenate(ratios)
    scale = float(np.median(ratio))
    return ParametrizationCheck(
        scale=scale,
        expected_scale=7 / (27 * np.pi),
        max_deviation=float(np.max(np.abs(ratio / scale - 1))),
        max_x_deviation=float(np.max(np.concatenate(x_errors))),
        samples=len(ratio),
    )
