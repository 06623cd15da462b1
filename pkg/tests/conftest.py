import json

import numpy as np
import pytest

from src.cyclewalk.arc_graph import GraphKind, build_graph


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


@pytest.fixture
def tilde_space():
    return build_graph(GraphKind.TILDE_C4, 60)


@pytest.fixture
def prime_space():
    return build_graph(GraphKind.C4_PRIME, 3)


@pytest.fixture
def write_state(tmp_path):
    """Write a state-file payload and return its path."""

    def _write(payload, name="state.json"):
        path = tmp_path / name
        text = payload if isinstance(payload, str) else json.dumps(payload)
        path.write_text(text, encoding="utf-8")
        return path

    return _write
