"""Launcher module - resolves run configurations and executes each workflow."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from src.cyclewalk.arc_graph import GraphKind, WalkState, required_radius
from src.cyclewalk.density import parametric_curves
from src.cyclewalk.evolution import iterate, position_distribution, scattering_rates
from src.cyclewalk.homology import LOCALIZATION_TOLERANCE, homological_projection
from src.cyclewalk.models import RunConfig, SimulationSummary, VerificationReport
from src.cyclewalk.presets import resolve_preset
from src.cyclewalk.settings import DEFAULT_GRID
from src.cyclewalk.spectral import band_lambda, spectral_map, uniform_grid, velocity, velocity_derivative
from src.utils.state_loader import StateFileLoader
from src.utils.writers import csv_text, json_text, write_csv, write_json
from src.verifier.evaluator import AcceptanceEvaluator

logger = logging.getLogger("cyclewalk.launcher")

SPECTRUM_GRID = 4096
NEGLIGIBLE = 1e-15


@dataclass(frozen=True)
class InitialStates:
    """Initial state(s) of a run; several states are averaged as an equal mixture."""

    states: list[WalkState]
    normalization: float
    source: str

    @property
    def graph(self) -> GraphKind:
        return self.states[0].space.kind


class Launcher:
    """Runs one workflow per call; holds the state-file cache."""

    def __init__(self, loader: StateFileLoader | None = None):
        self._loader = loader or StateFileLoader()

    def resolve_initial(self, config: RunConfig, t_max: int = 0) -> InitialStates:
        """Build the initial states on a window wide enough for ``t_max`` steps.

        Raises:
            ValueError: If no source is given or it is on a different graph than ``config.graph``
            StateFileError: If the state file is invalid
        """
        initial = self._initial(config, t_max)
        if config.graph is not None and config.graph != initial.graph.value:
            raise ValueError(f"Initial state is on {initial.graph.value}, not {config.graph}")
        return initial

    def _initial(self, config: RunConfig, t_max: int) -> InitialStates:
        if config.preset is not None:
            radius = config.radius if config.radius is not None else required_radius(t_max, 2)
            states = resolve_preset(config.preset, radius)
            return InitialStates(states=states, normalization=1.0, source=config.preset)
        if config.initial is None:
            raise ValueError("Give an initial state file (--initial) or a preset (--preset)")

        loaded = self._loader.load(config.initial, config.radius)
        needed = required_radius(t_max, loaded.state.support_radius)
        if config.radius is None and loaded.state.space.radius < needed:
            loaded = self._loader.load(config.initial, needed)
        return InitialStates(states=[loaded.state], normalization=loaded.normalization, source=config.initial)

    def simulate(self, config: RunConfig) -> SimulationSummary:
        """Evolve the initial state and write the CSV `t,j,prob`.

        Raises:
            WindowOverflowError: If the walk reaches the window boundary
        """
        initial = self.resolve_initial(config, config.t_max)
        space = initial.states[0].space
        count = len(initial.states)

        probabilities = np.zeros((config.t_max + 1, 2 * space.radius + 1))
        positions = None
        for state in initial.states:
            for current in iterate(state, config.t_max):
                dist = position_distribution(current)
                positions = dist.positions
                probabilities[current.t] += dist.probabilities / count

        totals = probabilities.sum(axis=1)
        reached = np.abs(positions)[np.any(probabilities > NEGLIGIBLE, axis=0)]
        final = probabilities[-1]

        rows = (
            (t, int(j), float(p))
            for t in range(config.t_max + 1)
            for j, p in zip(positions, probabilities[t])
            if p > 0
        )
        out = Path(config.out or "distribution.csv")
        written = write_csv(out, ("t", "j", "prob"), rows)
        logger.info(f"Wrote {written} rows to {out}")

        summary = SimulationSummary(
            graph=initial.graph.value,
            radius=space.radius,
            t_max=config.t_max,
            normalization=initial.normalization,
            norm_drift=float(np.max(np.abs(totals - 1))),
            max_position=int(reached.max()) if reached.size else 0,
            origin_mass=float(final[positions == 0].sum()),
            reflected_mass=float(final[positions < 0].sum()),
            transmitted_mass=float(final[positions > 0].sum()),
        )
        write_json(out.with_suffix(".json"), summary)
        return summary

    def rates(self, config: RunConfig) -> dict[str, Any]:
        initial = self.resolve_initial(config, config.t_max)
        if initial.graph is not GraphKind.TILDE_C4:
            raise ValueError("Scattering rates need a tilde-c4 initial state")
        if len(initial.states) != 1:
            raise ValueError("Scattering rates need a single initial state")
        rates = scattering_rates(initial.states[0], t_max=config.t_max)
        result = rates.as_dict() | {"t": rates.t, "converged": rates.converged}
        self._maybe_write_json(config, result)
        return result

    def localize(self, config: RunConfig) -> dict[str, Any]:
        """Trapped mass and per-cycle weights; a mixture averages the weights."""
        initial = self.resolve_initial(config)
        projections = [homological_projection(state) for state in initial.states]
        count = len(projections)
        weights: dict[tuple[int, int], float] = {}
        for projection in projections:
            for overlap in projection.overlaps:
                key = (overlap.cell, overlap.m)
                weights[key] = weights.get(key, 0.0) + overlap.weight / count
        delta = sum(p.delta for p in projections) / count
        result = {
            "delta": delta,
            "overlaps": [{"m": m, "cell": cell, "weight": w} for (cell, m), w in weights.items()],
            "localized": delta > LOCALIZATION_TOLERANCE,
        }
        self._maybe_write_json(config, result)
        return result

    def spectrum(self, config: RunConfig) -> str:
        """CSV `k,j,lambda,nu_re,nu_im,x,dxdk` of the l = 0 branches."""
        k = uniform_grid(config.grid or SPECTRUM_GRID)
        rows = []
        for j in range(3):
            lam = band_lambda(j, k)
            nu = spectral_map(lam, 0)
            x = velocity(j, 0, k)
            dxdk = velocity_derivative(j, 0, k)
            rows.extend(
                (float(k[i]), j, float(lam[i]), float(nu[i].real), float(nu[i].imag), float(x[i]), float(dxdk[i]))
                for i in range(k.size)
            )
        header = ("k", "j", "lambda", "nu_re", "nu_im", "x", "dxdk")
        if config.out:
            write_csv(config.out, header, rows)
        return csv_text(header, rows)

    def density(self, config: RunConfig) -> dict[str, Any]:
        """Density curves CSV `branch,k,x,rho` plus a JSON sidecar.

        Raises:
            QuadratureError: If the mass identity cannot be met on the grid
        """
        initial = self.resolve_initial(config)
        if initial.graph is not GraphKind.C4_PRIME:
            raise ValueError("The limit density is defined for c4-prime initial states")
        law = parametric_curves(initial.states, config.grid or DEFAULT_GRID)

        out = Path(config.out or "curves.csv")
        rows = (
            (curve.branch, float(k), float(x), float(rho))
            for curve in law.curves
            for k, x, rho in zip(curve.k, curve.x, curve.rho)
        )
        write_csv(out, ("branch", "k", "x", "rho"), rows)

        sidecar = {
            "delta": law.delta,
            "continuous_mass": law.continuous_mass,
            "grid": law.grid,
            "curves": [
                {"branch": c.branch, "mass": c.mass, "support": list(c.support), "clip": c.clip()}
                for c in law.curves
            ],
            "cdf": [{"x": float(x), "F": law.cdf(x)} for x in config.cdf_at],
        }
        write_json(out.with_suffix(".json"), sidecar)
        return sidecar

    def verify(self, config: RunConfig) -> VerificationReport:
        report = AcceptanceEvaluator(seed=config.seed).run_eval(config.only)
        self._maybe_write_json(config, report)
        return report

    def _maybe_write_json(self, config: RunConfig, data: Any) -> None:
        if config.out:
            write_json(config.out, data)


def render(data: Any) -> str:
    return json_text(data)
