import numpy as np
import pytest

from src.cyclewalk.arc_graph import GraphKind, build_graph
from src.cyclewalk.density import parametric_curves
from src.cyclewalk.presets import fig3a
from src.verifier import evaluator
from src.verifier.evaluator import (
    CRITERIA,
    AcceptanceEvaluator,
    check_within_tolerance,
    final_distribution,
    kolmogorov_distance,
)

FAST = ["rates", "eigen", "delta", "bands", "velocity", "lambda"]


def test_check_within_tolerance():
    assert check_within_tolerance(0.5 + 1e-13, 0.5, 1e-12)
    assert not check_within_tolerance(0.6, 0.5, 1e-3)
    assert not check_within_tolerance(float("nan"), 0.0, 1.0)


def test_fast_criteria_pass():
    report = AcceptanceEvaluator(seed=0, threads=2).run_eval(FAST)
    failures = {c.name: (c.error, [ch for ch in c.checks if not ch.passed]) for c in report.criteria if not c.passed}
    assert report.passed, failures
    assert [c.name for c in report.criteria] == [name for name in CRITERIA if name in FAST]


def test_lemma_criterion_passes():
    report = AcceptanceEvaluator(seed=1).run_eval(["lemma"])
    assert report.passed


def test_mass_criterion_is_reproducible():
    first = AcceptanceEvaluator(seed=7, threads=1).run_eval(["mass"])
    second = AcceptanceEvaluator(seed=7, threads=4).run_eval(["mass"])
    assert first.model_dump() == second.model_dump()
    assert first.passed


def test_unknown_criterion():
    with pytest.raises(ValueError):
        AcceptanceEvaluator().run_eval(["rates", "bogus"])


def test_failing_criterion_is_recorded(monkeypatch):
    def broken(rng):
        raise RuntimeError("boom")

    monkeypatch.setitem(CRITERIA, "delta", ("broken on purpose", broken))
    report = AcceptanceEvaluator().run_eval(["delta", "eigen"])
    assert not report.passed
    delta, eigen = report.criteria
    assert delta.error == "boom"
    assert not delta.passed
    assert eigen.passed


def test_kolmogorov_distance_of_short_run():
    space = build_graph(GraphKind.C4_PRIME, 205)
    state = fig3a(space)
    distance = kolmogorov_distance(final_distribution(state, 200), parametric_curves(state, 4096))
    assert 0 <= distance < 0.1


def test_singular_points_cover_edges():
    assert 1 / np.sqrt(10) in evaluator.SINGULAR_POINTS
    assert 2 / 7 in evaluator.SINGULAR_POINTS


@pytest.mark.slow
def test_full_suite_passes():
    report = AcceptanceEvaluator(seed=0).run_eval()
    assert len(report.criteria) == len(CRITERIA)
    assert report.passed, [c.name for c in report.criteria if not c.passed]
