"""
Acceptance evaluator for the walk toolkit.

Each criterion builds its own inputs and returns one or more checks of a
measured number against an expected value under a tolerance. A criterion
that raises is recorded as failed with its error message and the run
continues.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np

from src.cyclewalk.arc_graph import (
    TAIL,
    GraphKind,
    Vertex,
    WalkState,
    build_graph,
    required_radius,
    step_amplitudes,
)
from src.cyclewalk.density import LimitLaw, lambda_parametrization_check, parametric_curves
from src.cyclewalk.evolution import (
    LemmaCoefficients,
    PositionDistribution,
    iterate,
    lemma_limits,
    lemma_mu,
    position_distribution,
    scattering_rates,
    vertex_probabilities,
)
from src.cyclewalk.homology import cycle_functional, homological_projection
from src.cyclewalk.models import Check, CriterionResult, VerificationReport
from src.cyclewalk.presets import case_i, case_ii, fig3a, fig3b, random_cell_state, uniform_states
from src.cyclewalk.settings import CYCLE_WALK_THREADS, DEFAULT_GRID
from src.cyclewalk.spectral import BANDS, band_lambda, midpoint_grid, uniform_grid, velocity, velocity_derivative

logger = logging.getLogger("cyclewalk.verifier")

LONG_RUN = 1000
EXCLUSION = 0.01
SINGULAR_POINTS = (0.0, 2 / 7, -2 / 7, 1 / np.sqrt(10), -1 / np.sqrt(10))

Outcome = tuple[list[Check], dict[str, Any]]


def check_within_tolerance(measured: float, expected: float, tolerance: float) -> bool:
    """True when |measured - expected| <= tolerance; NaN never passes."""
    return bool(abs(measured - expected) <= tolerance)


def _check(name: str, measured: float, expected: float, tolerance: float) -> Check:
    return Check(
        name=name,
        measured=float(measured),
        expected=float(expected),
        tolerance=float(tolerance),
        passed=check_within_tolerance(measured, expected, tolerance),
    )


def final_distribution(state: WalkState, t_max: int) -> PositionDistribution:
    """Position law after ``t_max`` steps, keeping only the current state."""
    final = state
    for final in iterate(state, t_max):
        pass
    return position_distribution(final)


def kolmogorov_distance(final: PositionDistribution, law: LimitLaw, exclusion: float = EXCLUSION) -> float:
    """sup |F_t(x) - F(x)| of X_t / t.

    The empirical CDF is probed halfway between lattice sites, skipping
    probes within ``exclusion`` of the origin and the support edges.
    """
    probes = (final.positions + 0.5) / final.t
    empirical = np.cumsum(final.probabilities)
    keep = np.ones(probes.shape, dtype=bool)
    for point in SINGULAR_POINTS:
        keep &= np.abs(probes - point) > exclusion
    return float(np.max(np.abs(empirical[keep] - law.cdf(probes[keep]))))


def _rates(rng: np.random.Generator) -> Outcome:
    space = build_graph(GraphKind.TILDE_C4, required_radius(200, 2))
    expected = {"case-i": (1 / 5, 0.0, 4 / 5), "case-ii": (9 / 20, 1 / 2, 1 / 20)}
    checks, detail = [], {}
    for name, builder in (("case-i", case_i), ("case-ii", case_ii)):
        rates = scattering_rates(builder(space), t_max=200)
        for key, measured, value in zip(("c_R", "c_O", "c_T"), rates.as_dict().values(), expected[name]):
            checks.append(_check(f"{name} {key}", measured, value, 1e-8))
        detail[name] = {"t": rates.t, "converged": rates.converged}
    return checks, detail


def _lemma(rng: np.random.Generator, samples: int = 100, horizon: int = 40, period: int = 50) -> Outcome:
    t_max = 4 * period + 3
    space = build_graph(GraphKind.TILDE_C4, required_radius(t_max, 1))
    left = space.vertex_index(Vertex(-1, TAIL))
    right = space.vertex_index(Vertex(1, TAIL))
    cycle = {local: space.vertex_index(Vertex(0, local)) for local in ("0'", "u", "d", "0")}

    flux_error, limit_error = 0.0, 0.0
    for _ in range(samples):
        coeffs = LemmaCoefficients.random(rng)
        limits = lemma_limits(coeffs)
        for state in iterate(coeffs.state(space), t_max):
            t = state.t
            if 1 <= t <= horizon:
                mu = vertex_probabilities(state)
                flux_error = max(
                    flux_error,
                    abs(mu[left] - lemma_mu(coeffs, t, -1)),
                    abs(mu[right] - lemma_mu(coeffs, t, 1)),
                )
            elif t >= 4 * period:
                mu = vertex_probabilities(state)
                phase = t - 4 * period + 1
                for local, index in cycle.items():
                    limit_error = max(limit_error, abs(mu[index] - limits[(local, phase)]))
    checks = [
        _check("escape flux at +-1", flux_error, 0.0, 1e-9),
        _check("period-4 cycle limits", limit_error, 0.0, 1e-6),
    ]
    return checks, {"samples": samples, "horizon": horizon}


def _eigen(rng: np.random.Generator, cells: int = 5) -> Outcome:
    space = build_graph(GraphKind.C4_PRIME, cells + 1)
    worst = 0.0
    for cell in range(-cells, cells + 1):
        for m in range(4):
            eta = cycle_functional(space, m, cell)
            vector = eta.vector
            residual = np.linalg.norm(step_amplitudes(space, vector) - eta.eigenvalue * vector)
            worst = max(worst, float(residual))
    return [_check("max eigen-residual", worst, 0.0, 1e-12)], {"cells": cells}


def _delta(rng: np.random.Generator) -> Outcome:
    space = build_graph(GraphKind.C4_PRIME, 2)
    uniform = float(np.mean([homological_projection(s).delta for s in uniform_states(space)]))
    checks = [
        _check("fig3a", homological_projection(fig3a(space)).delta, 0.0, 1e-14),
        _check("fig3b", homological_projection(fig3b(space)).delta, 1 / 2, 1e-12),
        _check("uniform", uniform, 2 / 5, 1e-12),
    ]
    return checks, {}


def _bands(rng: np.random.Generator, points: int = 10_000) -> Outcome:
    k = uniform_grid(points)
    checks = []
    for j, (low, high) in enumerate(BANDS):
        lam = band_lambda(j, k)
        residual = float(np.max(np.abs(9 * lam**3 - 7 * lam - 2 * np.cos(k))))
        checks.append(_check(f"band {j} cubic residual", residual, 0.0, 1e-10))
        checks.append(_check(f"band {j} lower edge", lam.min(), low, 1e-9))
        checks.append(_check(f"band {j} upper edge", lam.max(), high, 1e-9))
    return checks, {"points": points}


def _velocity(rng: np.random.Generator, points: int = 10_000, h: float = 1e-5) -> Outcome:
    k = uniform_grid(points)
    checks = []
    for j, edge in ((0, 1 / np.sqrt(10)), (2, 2 / 7)):
        for l in range(2):
            checks.append(_check(f"max |x_{j},{l}|", np.max(np.abs(velocity(j, l, k))), edge, 1e-10))

    # finite differences away from the band-edge jumps at 0 and pi
    probe = midpoint_grid(64)
    distance = np.abs(probe)
    probe = probe[(distance > 0.05) & (distance < np.pi - 0.05)]
    velocity_error, derivative_error = 0.0, 0.0
    for j in range(3):
        lam = band_lambda(j, probe)
        dlam = (band_lambda(j, probe + h) - band_lambda(j, probe - h)) / (2 * h)
        for l in range(2):
            sign = (-1) ** l
            velocity_error = max(
                velocity_error,
                float(np.max(np.abs(velocity(j, l, probe) - sign * dlam / np.sqrt(1 - lam**2)))),
            )
            dx = (velocity(j, l, probe + h) - velocity(j, l, probe - h)) / (2 * h)
            derivative_error = max(
                derivative_error,
                float(np.max(np.abs(velocity_derivative(j, l, probe) - dx))),
            )
    checks.append(_check("velocity vs finite difference", velocity_error, 0.0, 1e-6))
    checks.append(_check("derivative vs finite difference", derivative_error, 0.0, 1e-6))
    return checks, {"probes": int(probe.size)}


def _weak(rng: np.random.Generator) -> Outcome:
    space = build_graph(GraphKind.C4_PRIME, required_radius(LONG_RUN, 0))
    checks = []
    for name, builder in (("fig3a", fig3a), ("fig3b", fig3b)):
        state = builder(space)
        distance = kolmogorov_distance(final_distribution(state, LONG_RUN), parametric_curves(state, DEFAULT_GRID))
        checks.append(_check(f"{name} Kolmogorov distance", distance, 0.0, 0.05))
    return checks, {"t": LONG_RUN, "exclusion": EXCLUSION}


def _moments(rng: np.random.Generator, samples: int = 10) -> Outcome:
    space = build_graph(GraphKind.C4_PRIME, required_radius(LONG_RUN, 0))
    worst = 0.0
    for _ in range(samples):
        state = random_cell_state(space, rng)
        final = final_distribution(state, LONG_RUN)
        empirical = float(np.sum((final.positions / final.t) ** 2 * final.probabilities))
        limit = parametric_curves(state, DEFAULT_GRID).moment(2)
        worst = max(worst, abs(empirical - limit) / limit)
    return [_check("relative second-moment error", worst, 0.0, 0.01)], {"samples": samples, "t": LONG_RUN}


def _mass(rng: np.random.Generator, samples: int = 50, cells: int = 2) -> Outcome:
    space = build_graph(GraphKind.C4_PRIME, cells + 1)
    support = np.flatnonzero(np.abs(space.arc_cell) <= cells)
    worst = 0.0
    for _ in range(samples):
        amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
        amplitudes[support] = rng.normal(size=support.size) + 1j * rng.normal(size=support.size)
        state = WalkState(space, amplitudes).normalized()
        worst = max(worst, abs(parametric_curves(state, DEFAULT_GRID).total_mass - 1))
    return [_check("|delta + continuous mass - 1|", worst, 0.0, 1e-6)], {"samples": samples}


def _lambda(rng: np.random.Generator) -> Outcome:
    check = lambda_parametrization_check()
    checks = [
        _check("density ratio", check.scale, check.expected_scale, 1e-6 * check.expected_scale),
        _check("relative deviation", check.max_deviation, 0.0, 1e-6),
        _check("|x| mismatch", check.max_x_deviation, 0.0, 1e-6),
    ]
    return checks, {"samples": check.samples}


CRITERIA: dict[str, tuple[str, Callable[[np.random.Generator], Outcome]]] = {
    "rates": ("Scattering rates on tilde-c4 for the two single-arc cases", _rates),
    "lemma": ("Closed-form escape flux and period-4 cycle limits for random states", _lemma),
    "eigen": ("Cycle functionals are eigenvectors of U with eigenvalue i^m", _eigen),
    "delta": ("Trapped mass of the named c4-prime states", _delta),
    "bands": ("Random-walk bands solve the cubic and reach their edges", _bands),
    "velocity": ("Velocity extrema and finite-difference agreement", _velocity),
    "weak": ("Kolmogorov distance of X_t/t at t=1000 to the limit law", _weak),
    "moments": ("Second moment at t=1000 against the limit law", _moments),
    "mass": ("Trapped mass plus continuous mass equals one", _mass),
    "lambda": ("Lambda- and k-parametrized densities agree", _lambda),
}


class AcceptanceEvaluator:
    """Runs the acceptance criteria and collects a report."""

    def __init__(self, seed: int = 0, threads: int = CYCLE_WALK_THREADS):
        self.seed = seed
        self.threads = max(1, threads)

    def validate_request(self, only: Sequence[str]) -> tuple[bool, str]:
        unknown = set(only) - set(CRITERIA)
        if unknown:
            return False, f"Unknown criteria: {sorted(unknown)}"
        return True, "ok"

    def _rng(self, name: str) -> np.random.Generator:
        # keyed by position in the full table so a subset sees the same streams
        return np.random.default_rng([self.seed, list(CRITERIA).index(name)])

    def _run_single_criterion(self, name: str) -> CriterionResult:
        description, criterion = CRITERIA[name]
        logger.info(f"Running criterion {name}...")
        try:
            checks, detail = criterion(self._rng(name))
        except Exception as e:
            logger.error(f"Criterion {name} failed: {e}")
            return CriterionResult(name=name, description=description, passed=False, error=str(e))
        passed = all(c.passed for c in checks)
        logger.info(f"Criterion {name} completed: {passed}")
        return CriterionResult(name=name, description=description, passed=passed, checks=checks, detail=detail)

    def run_eval(self, only: Sequence[str] = ()) -> VerificationReport:
        """Run the selected criteria (all when ``only`` is empty).

        Raises:
            ValueError: If ``only`` names an unknown criterion
        """
        ok, message = self.validate_request(only)
        if not ok:
            raise ValueError(message)
        names = [name for name in CRITERIA if not only or name in only]
        logger.info(f"Evaluating {len(names)} criteria with {self.threads} threads (seed {self.seed})")

        with ThreadPoolExecutor(max_workers=min(self.threads, len(names))) as pool:
            results = list(pool.map(self._run_single_criterion, names))

        passed = all(r.passed for r in results)
        logger.info(f"Verification {'passed' if passed else 'failed'}: {sum(r.passed for r in results)}/{len(results)}")
        return VerificationReport(seed=self.seed, passed=passed, criteria=results)
