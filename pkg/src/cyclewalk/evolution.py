"""Time evolution, position laws and the closed-form escape oracle on C~4."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from numpy.typing import NDArray

from src.cyclewalk.arc_graph import (
    ArcSpace,
    GraphKind,
    Vertex,
    WalkState,
    apply_evolution,
    required_radius,
)

logger = logging.getLogger("cyclewalk.evolution")

NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class PositionDistribution:
    """Law of the position X_t over the window's position labels."""

    t: int
    positions: NDArray[np.int64]
    probabilities: NDArray[np.float64]

    def __getitem__(self, j: int) -> float:
        index = np.searchsorted(self.positions, j)
        if index < len(self.positions) and self.positions[index] == j:
            return float(self.probabilities[index])
        return 0.0

    @property
    def total(self) -> float:
        return float(self.probabilities.sum())

    def mass(self, low: float = -np.inf, high: float = np.inf) -> float:
        """Probability that low <= X_t <= high."""
        mask = (self.positions >= low) & (self.positions <= high)
        return float(self.probabilities[mask].sum())

    def as_dict(self) -> dict[int, float]:
        return {int(j): float(p) for j, p in zip(self.positions, self.probabilities)}


def vertex_probabilities(state: WalkState) -> NDArray[np.float64]:
    """mu_t(v) for every vertex of the window, in vertex-index order."""
    space = state.space
    return np.bincount(space.origin, weights=np.abs(state.amplitudes) ** 2, minlength=space.n_vertices)


def vertex_distribution(state: WalkState) -> dict[Vertex, float]:
    """mu_t(v): summed |amplitude|^2 over the arcs leaving v."""
    probabilities = vertex_probabilities(state)
    return {vertex: float(p) for vertex, p in zip(state.space.vertices, probabilities)}


def position_distribution(state: WalkState) -> PositionDistribution:
    """Aggregate mu_t by position label (tail coordinate or cell index)."""
    space = state.space
    offset = space.radius
    probabilities = np.bincount(
        space.arc_cell + offset,
        weights=np.abs(state.amplitudes) ** 2,
        minlength=2 * offset + 1,
    )
    return PositionDistribution(
        t=state.t,
        positions=np.arange(-offset, offset + 1, dtype=np.int64),
        probabilities=probabilities,
    )


def iterate(state: WalkState, t_max: int) -> Iterator[WalkState]:
    """Yield the initial state and the next ``t_max`` states."""
    if t_max < 0:
        raise ValueError(f"t_max must be non-negative, got {t_max}")
    norm = state.norm
    if abs(norm**2 - 1) > NORM_TOLERANCE:
        raise ValueError(f"Initial state is not normalized (|psi|^2 = {norm**2:.12g})")
    needed = required_radius(t_max, state.support_radius)
    if state.space.radius < needed:
        logger.warning(
            f"Window radius {state.space.radius} is below {needed} for t_max={t_max}; overflow is possible"
        )
    yield state
    for _ in range(t_max):
        state = apply_evolution(state.space, state)
        yield state


def run(state: WalkState, t_max: int) -> list[PositionDistribution]:
    """Evolve ``t_max`` steps and collect the position law at every time.

    Raises:
        WindowOverflowError: If the walk reaches the window boundary
    """
    distributions = []
    for current in iterate(state, t_max):
        dist = position_distribution(current)
        if abs(dist.total - 1) > NORM_TOLERANCE:
            logger.warning(f"Norm drift {dist.total - 1:.3e} at t={current.t}")
        distributions.append(dist)
    logger.info(f"Ran {t_max} steps on {state.space.kind.value} (radius {state.space.radius})")
    return distributions


def empirical_moment(distributions: Sequence[PositionDistribution], r: int) -> float:
    """E[(X_t / t)^r] at the final time of a run."""
    if r < 0:
        raise ValueError(f"Moment order must be non-negative, got {r}")
    final = distributions[-1]
    if r == 0:
        return final.total
    if final.t == 0:
        raise ValueError("Rescaled moments of order >= 1 are undefined at t = 0")
    scaled = final.positions / final.t
    return float(np.sum(scaled**r * final.probabilities))


@dataclass(frozen=True)
class LemmaCoefficients:
    """Amplitudes a_0..a_9 on the ten fundamental arcs of C~4."""

    amplitudes: NDArray[np.complex128]

    def __post_init__(self):
        if self.amplitudes.shape != (10,):
            raise ValueError(f"Expected 10 coefficients, got shape {self.amplitudes.shape}")
        total = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(total - 1) > 1e-12:
            raise ValueError(f"Coefficients are not normalized (sum |a_j|^2 = {total:.15g})")

    @classmethod
    def from_values(cls, values: Sequence[complex]) -> "LemmaCoefficients":
        return cls(np.asarray(values, dtype=np.complex128))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "LemmaCoefficients":
        raw = rng.normal(size=10) + 1j * rng.normal(size=10)
        return cls(raw / np.linalg.norm(raw))

    def state(self, space: ArcSpace) -> WalkState:
        return WalkState.from_coins(space, self.amplitudes)

    def __getitem__(self, coin: int) -> complex:
        return complex(self.amplitudes[coin])


def _escape_groups(a: LemmaCoefficients) -> dict[str, float]:
    return {
        "left": abs(a[0] - 2 * a[1] - 2 * a[2]) ** 2,
        "right": abs(2 * a[7] + 2 * a[8] - a[9]) ** 2,
        "0'": abs(4 * a[0] + a[1] + a[2]) ** 2,
        "0": abs(a[7] + a[8] + 4 * a[9]) ** 2,
        "to 0'": abs(a[4] + a[5]) ** 2,
        "to 0": abs(a[3] + a[6]) ** 2,
    }


# Symmetric channel feeding each site at phase r = 1..4 of the period
_CHANNELS = {
    -1: ("0'", "to 0'", "0", "to 0"),
    1: ("0", "to 0", "0'", "to 0'"),
}


def lemma_mu(coeffs: LemmaCoefficients, n: int, site: int) -> float:
    """Closed form of mu_n(-1) or mu_n(1) for an initial state on the fundamental arcs.

    Each symmetric channel loses a factor 1/3 in amplitude at every pass
    through a degree-3 vertex, which gives the 81^-m decay along each
    residue class of n mod 4.

    Args:
        coeffs: Initial amplitudes a_0..a_9
        n: Time, at least 1
        site: -1 (tail next to 0') or 1 (tail next to 0)

    Returns:
        Probability at the given tail vertex at time n
    """
    if n < 1:
        raise ValueError(f"Time must be >= 1, got {n}")
    if site not in (-1, 1):
        raise ValueError(f"Site must be -1 or 1, got {site}")

    groups = _escape_groups(coeffs)
    if n == 1:
        return groups["left" if site == -1 else "right"] / 9

    m, phase = divmod(n - 1, 4)
    channel = _CHANNELS[site][phase]
    exponent = 2 * m + 1 if phase < 2 else 2 * m + 2
    return 4 * groups[channel] / 9**exponent


def escape_totals(coeffs: LemmaCoefficients) -> tuple[float, float]:
    """Total mass ever passing through -1 and through 1 (sums of lemma_mu over n)."""
    groups = _escape_groups(coeffs)
    reflected = (
        groups["left"] / 9
        + 9 / 20 * groups["to 0'"]
        + (groups["0"] + groups["to 0"]) / 20
        + groups["0'"] / 180
    )
    transmitted = (
        groups["right"] / 9
        + 9 / 20 * groups["to 0"]
        + (groups["0'"] + groups["to 0'"]) / 20
        + groups["0"] / 180
    )
    return reflected, transmitted


def lemma_limits(coeffs: LemmaCoefficients) -> dict[tuple[str, int], float]:
    """Period-4 limits of mu_t on the cycle vertices.

    Key (v, j) is the limit of mu_t(v) along t = 4n + j - 1, j = 1..4.
    """
    a = coeffs
    left = abs(a[1] - a[2]) ** 2
    right = abs(a[7] - a[8]) ** 2
    upper = abs(a[4] - a[5]) ** 2
    lower = abs(a[3] - a[6]) ** 2

    origin_prime = (left / 2, upper / 2, right / 2, lower / 2)
    origin = (right / 2, lower / 2, left / 2, upper / 2)
    side = ((lower + upper) / 4, (left + right) / 4, (lower + upper) / 4, (left + right) / 4)

    limits: dict[tuple[str, int], float] = {}
    for j in range(1, 5):
        limits[("0'", j)] = origin_prime[j - 1]
        limits[("0", j)] = origin[j - 1]
        limits[("u", j)] = side[j - 1]
        limits[("d", j)] = side[j - 1]
    return limits


@dataclass(frozen=True)
class ScatteringRates:
    reflected: float
    origin: float
    transmitted: float
    t: int
    converged: bool

    def as_dict(self) -> dict[str, float]:
        return {"c_R": self.reflected, "c_O": self.origin, "c_T": self.transmitted}


def _rates(dist: PositionDistribution) -> NDArray[np.float64]:
    return np.array([dist.mass(high=-1), dist[0], dist.mass(low=1)])


def scattering_rates(state: WalkState, t_max: int = 200, tolerance: float = 1e-10) -> ScatteringRates:
    """Reflected / trapped / transmitted masses of a walk on C~4.

    Steps until the rates change by less than ``tolerance`` over one period
    of 4, or until ``t_max``.
    """
    if state.space.kind is not GraphKind.TILDE_C4:
        raise ValueError("Scattering rates are defined on tilde-c4 only")

    history: list[NDArray[np.float64]] = []
    current = np.zeros(3)
    converged = False
    last = state
    for last in iterate(state, t_max):
        current = _rates(position_distribution(last))
        history.append(current)
        if last.t >= 4 and np.max(np.abs(current - history[-5])) < tolerance:
            converged = True
            break
    if not converged:
        logger.warning(f"Scattering rates not converged to {tolerance:g} within {t_max} steps")
    logger.info(f"Rates at t={last.t}: c_R={current[0]:.12g} c_O={current[1]:.12g} c_T={current[2]:.12g}")
    return ScatteringRates(
        reflected=float(current[0]),
        origin=float(current[1]),
        transmitted=float(current[2]),
        t=last.t,
        converged=converged,
    )


@dataclass(frozen=True)
class SpreadingReport:
    localized: bool
    trapped_mass: float
    ballistic_mass: float
    linear_mass: float
    kind: str


def classify_spreading(
    distributions: Sequence[PositionDistribution],
    site_radius: int = 1,
    threshold: float = 0.01,
) -> SpreadingReport:
    """Classify a run as localized or not and as ballistic or linear spreading.

    Trapped mass is the mean mass at |j| <= site_radius over the last period.
    Mass beyond that is ballistic when |X_t / t| >= 1/2 and linear otherwise.
    """
    last_period = distributions[-4:]
    trapped = float(np.mean([d.mass(-site_radius, site_radius) for d in last_period]))

    final = distributions[-1]
    if final.t == 0:
        raise ValueError("Cannot classify spreading from the initial distribution alone")
    moving = np.abs(final.positions) > site_radius
    fast = np.abs(final.positions) / final.t >= 0.5
    ballistic = float(final.probabilities[moving & fast].sum())
    linear = float(final.probabilities[moving & ~fast].sum())

    if ballistic + linear < threshold:
        kind = "none"
    elif ballistic >= linear:
        kind = "ballistic"
    else:
        kind = "linear"
    return SpreadingReport(
        localized=trapped > threshold,
        trapped_mass=trapped,
        ballistic_mass=ballistic,
        linear_mass=linear,
        kind=kind,
    )
