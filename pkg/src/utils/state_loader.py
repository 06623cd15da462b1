"""State-file loader with validation and caching."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from src.cyclewalk.arc_graph import WalkState, build_graph, parse_vertex
from src.cyclewalk.errors import StateFileError
from src.cyclewalk.models import StateFile

logger = logging.getLogger("cyclewalk.state_loader")


@dataclass(frozen=True)
class LoadedState:
    """A normalized initial state and the factor it was divided by."""

    state: WalkState
    normalization: float


class StateFileLoader:
    """Loads JSON initial-state files into walk states."""

    def __init__(self):
        self._states: dict[tuple[str, int], LoadedState] = {}

    def read(self, path: str | Path) -> StateFile:
        """Parse and validate a state file.

        Raises:
            StateFileError: If the file is missing, not JSON or fails validation
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise StateFileError(f"Cannot read state file {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise StateFileError(f"State file {path} is not valid JSON: {e}") from e
        try:
            return StateFile.model_validate(data)
        except ValidationError as e:
            raise StateFileError(f"Invalid state file {path}: {e}") from e

    def load(self, path: str | Path, radius: int | None = None) -> LoadedState:
        """Load a state file onto a window of at least ``radius``.

        Args:
            path: JSON state file
            radius: Minimum window radius; the file's own radius is used when larger

        Returns:
            LoadedState whose state has unit norm

        Raises:
            StateFileError: On any read, validation or placement problem
        """
        state_file = self.read(path)
        window = max(state_file.radius, radius or 0)
        cache_key = (str(Path(path).resolve()), window)
        if cache_key not in self._states:
            self._states[cache_key] = self._build(state_file, window, path)
        return self._states[cache_key]

    def _build(self, state_file: StateFile, window: int, path: str | Path) -> LoadedState:
        try:
            space = build_graph(state_file.graph, window)
            amplitudes = np.zeros(space.n_arcs, dtype=np.complex128)
            for entry in state_file.amplitudes:
                if entry.coin is not None:
                    arc = space.coin_arc(entry.coin, entry.cell)
                else:
                    origin, terminus = (parse_vertex(space.kind, label) for label in entry.arc)
                    arc = space.arc_between(origin, terminus)
                amplitudes[arc] += entry.value
        except ValueError as e:
            raise StateFileError(f"Cannot place state from {path}: {e}") from e

        norm = float(np.linalg.norm(amplitudes))
        if norm == 0:
            raise StateFileError(f"State file {path} describes the zero vector")
        if abs(norm - 1) > 1e-12:
            logger.warning(f"Normalizing state from {path} (norm {norm:.12g})")
        logger.info(f"Loaded {len(state_file.amplitudes)} amplitudes on {state_file.graph} radius {window}")
        return LoadedState(state=WalkState(space, amplitudes / norm), normalization=norm)
