import json

import pytest
from typer.testing import CliRunner

from main import app

runner = CliRunner()


def _json(result):
    return json.loads(result.stdout)


def test_localize_preset():
    result = runner.invoke(app, ["localize", "--preset", "fig3b"])
    assert result.exit_code == 0
    report = _json(result)
    assert report["delta"] == pytest.approx(0.5, abs=1e-12)
    assert report["localized"] is True


def test_localize_uniform_mixture():
    report = _json(runner.invoke(app, ["localize", "--preset", "uniform"]))
    assert report["delta"] == pytest.approx(0.4, abs=1e-12)


def test_rates_case_i(tmp_path):
    out = tmp_path / "rates.json"
    result = runner.invoke(app, ["rates", "--preset", "case-i", "--out", str(out)])
    assert result.exit_code == 0
    rates = json.loads(out.read_text())
    assert rates["c_T"] == pytest.approx(0.8, abs=1e-8)
    assert rates["c_R"] == pytest.approx(0.2, abs=1e-8)


def test_simulate_t_zero_echoes_initial(tmp_path):
    out = tmp_path / "dist.csv"
    result = runner.invoke(app, ["simulate", "--preset", "fig3b", "--t-max", "0", "--out", str(out)])
    assert result.exit_code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,j,prob"
    assert len(lines) == 2
    t, j, prob = lines[1].split(",")
    assert (t, j) == ("0", "0")
    assert float(prob) == pytest.approx(1.0)
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["origin_mass"] == pytest.approx(1.0)
    assert summary["max_position"] == 0


def test_simulate_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (first, second):
        result = runner.invoke(app, ["simulate", "--preset", "case-i", "--t-max", "30", "--out", str(out)])
        assert result.exit_code == 0
    assert first.read_bytes() == second.read_bytes()
    assert first.with_suffix(".json").read_bytes() == second.with_suffix(".json").read_bytes()


def test_simulate_overflow_exit_code():
    result = runner.invoke(app, ["simulate", "--preset", "case-ii", "--radius", "2", "--t-max", "10"])
    assert result.exit_code == 3


def test_simulate_state_file(tmp_path, write_state):
    path = write_state({"graph": "tilde-c4", "radius": 1, "amplitudes": [{"coin": 0, "re": 1}]})
    out = tmp_path / "dist.csv"
    result = runner.invoke(app, ["simulate", "--initial", str(path), "--t-max", "60", "--out", str(out)])
    assert result.exit_code == 0
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["transmitted_mass"] == pytest.approx(0.8, abs=1e-8)
    assert summary["norm_drift"] < 1e-12


def test_corrupted_state_file(tmp_path, write_state):
    path = write_state("{broken")
    out = tmp_path / "dist.csv"
    result = runner.invoke(app, ["simulate", "--initial", str(path), "--out", str(out)])
    assert result.exit_code == 2
    assert not out.exists()


def test_graph_mismatch_is_rejected():
    result = runner.invoke(app, ["localize", "--preset", "case-ii", "--graph", "c4-prime"])
    assert result.exit_code != 0


def test_preset_name_as_initial_conflicts_with_preset():
    result = runner.invoke(app, ["localize", "--preset", "fig3b", "--initial", "uniform"])
    assert result.exit_code == 2
    assert not result.stdout.strip().startswith("{")


def test_spectrum_csv():
    result = runner.invoke(app, ["spectrum", "--grid", "8"])
    assert result.exit_code == 0
    lines = result.stdout.splitlines()
    assert lines[0] == "k,j,lambda,nu_re,nu_im,x,dxdk"
    assert len(lines) == 1 + 3 * 8


def test_spectrum_grid_must_be_multiple_of_four():
    assert runner.invoke(app, ["spectrum", "--grid", "10"]).exit_code == 2


def test_density_uniform(tmp_path):
    out = tmp_path / "curves.csv"
    result = runner.invoke(
        app, ["density", "--initial", "uniform", "--grid", "1024", "--out", str(out), "--cdf-at=-1,0,1"]
    )
    assert result.exit_code == 0
    sidecar = json.loads(out.with_suffix(".json").read_text())
    assert sidecar["delta"] == pytest.approx(0.4, abs=1e-12)
    cdf = [point["F"] for point in sidecar["cdf"]]
    assert cdf[0] == pytest.approx(0.0)
    assert cdf[2] == pytest.approx(1.0, abs=1e-6)
    assert all(curve["clip"] > 0 for curve in sidecar["curves"])
    assert out.read_text().splitlines()[0] == "branch,k,x,rho"


def test_density_rejects_tilde():
    assert runner.invoke(app, ["density", "--preset", "case-i", "--grid", "64"]).exit_code == 2


def test_config_file_defaults(tmp_path):
    config = tmp_path / "run.toml"
    config.write_text('[config]\nt_max = 4\npreset = "case-ii"\n')
    out = tmp_path / "dist.csv"
    result = runner.invoke(app, ["simulate", "--config", str(config), "--out", str(out)])
    assert result.exit_code == 0
    assert json.loads(out.with_suffix(".json").read_text())["t_max"] == 4


def test_verify_subset(tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(app, ["verify", "--only", "delta,eigen", "--out", str(out)])
    assert result.exit_code == 0
    report = json.loads(out.read_text())
    assert [c["name"] for c in report["criteria"]] == ["eigen", "delta"]
    assert report["passed"] is True


def test_verify_unknown_criterion():
    assert runner.invoke(app, ["verify", "--only", "nope"]).exit_code == 2
