"""Config resolution, exit codes, report determinism, golden files."""
from pathlib import Path

import pytest

from qworlds.cli import main, parse_config, run_scenario
from qworlds.reporting import strip_wall_clock
from qworlds.scenarios import ScenarioError, UnknownScenarioError
from helpers import GOLDEN_SCENARIOS, golden_report_text

GOLDEN_DIR = Path(__file__).parent / "golden"


class TestParseConfig:
    def test_defaults_resolved_and_echoed(self):
        spec = parse_config("undo", {})
        assert spec.seed == 0
        assert spec.mode == "mwi"
        assert spec.trials == 10_000
        assert abs(spec.alpha) ** 2 == pytest.approx(0.5, abs=1e-12)

    def test_flags_override_config_file(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("trials = 500\nmode = collapse\nseed = 7\n")
        spec = parse_config("undo", {"trials": 200}, str(config))
        assert spec.trials == 200
        assert spec.mode == "collapse"
        assert spec.collapse_stage == "detector"
        assert spec.seed == 7

    def test_unknown_config_key_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("wavelength = 2.0\n")
        with pytest.raises(ScenarioError):
            parse_config("undo", {}, str(config))

    def test_malformed_line_rejected(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("just some words\n")
        with pytest.raises(ScenarioError):
            parse_config("undo", {}, str(config))

    def test_config_scenario_must_match(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("scenario = steering\n")
        with pytest.raises(ScenarioError):
            parse_config("undo", {}, str(config))

    def test_comments_and_hyphenated_keys(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text("# balanced undo\ncollapse-stage = observer\nmode = collapse\n")
        spec = parse_config("undo", {}, str(config))
        assert spec.collapse_stage == "observer"

    def test_alpha_beta_normalized(self):
        spec = parse_config("undo", {"alpha": 3 + 0j, "beta": 4 + 0j})
        assert spec.alpha == pytest.approx(0.6, abs=1e-15)
        assert spec.beta == pytest.approx(0.8, abs=1e-15)

    def test_negative_trials_rejected(self):
        with pytest.raises(ScenarioError):
            parse_config("undo", {"trials": -1})

    def test_irrelevant_parameter_rejected(self):
        with pytest.raises(ScenarioError):
            parse_config("steering", {"trials": 10})
        with pytest.raises(ScenarioError):
            parse_config("undo", {"marker": True})

    def test_stage_requires_collapse_mode(self):
        with pytest.raises(ScenarioError):
            parse_config("undo", {"mode": "mwi", "collapse_stage": "detector"})

    def test_unknown_scenario(self):
        with pytest.raises(UnknownScenarioError):
            parse_config("fig9", {})


class TestExitCodes:
    def test_success(self, capsys):
        assert main(["run", "fig3_interferometer"]) == 0
        out = capsys.readouterr().out
        assert "results.probabilities.D1 = 1.0" in out

    def test_unknown_scenario_is_2(self, capsys):
        assert main(["run", "fig9"]) == 2

    def test_invalid_parameter_is_3(self):
        assert main(["run", "undo", "--trials", "-1"]) == 3

    def test_unparsable_value_is_3(self):
        assert main(["run", "undo", "--trials", "many"]) == 3

    def test_integrator_failure_is_4(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        assert main(["run", "bohm_crossing", "--x-init", "-30"]) == 4

    def test_list_and_version(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "bohm_bubble" in out and "undo" in out
        assert main(["--version"]) == 0
        assert "qworlds 0.1.0" in capsys.readouterr().out

    def test_config_flag(self, tmp_path, capsys):
        config = tmp_path / "c.cfg"
        config.write_text("mu = 0.9\n")
        assert main(["run", "steering", "--config", str(config)]) == 0
        out = capsys.readouterr().out
        assert "results.p_min = 0.2" in out
        assert "results.p_max = 0.7999999999999997" in out
        assert "spec.grid = 10000" in out

    def test_out_file_written(self, tmp_path):
        out = tmp_path / "report.txt"
        assert main(["run", "bet", "--mu", "0.01", "--out", str(out)]) == 0
        text = out.read_text()
        assert "results.decision = reject" in text


class TestReports:
    def test_byte_identical_reports_for_identical_specs(self):
        spec = parse_config("undo", {"mode": "collapse", "trials": 2000, "seed": 11})
        first = run_scenario(spec).render()
        second = run_scenario(spec).render()
        assert strip_wall_clock(first) == strip_wall_clock(second)
        assert first.count("wall_clock_s = ") == 1

    def test_seed_changes_collapse_frequencies(self):
        base = parse_config("fig1_splitter", {"mode": "collapse", "trials": 300})
        a = run_scenario(base).render()
        b = run_scenario(parse_config("fig1_splitter",
                                      {"mode": "collapse", "trials": 300, "seed": 1})).render()
        assert strip_wall_clock(a) != strip_wall_clock(b)

    def test_trajectory_csv_matches_samples(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        spec = parse_config("bohm_crossing", {"t_max": 2.0})
        report = run_scenario(spec)
        csv_path = report.files[0]
        lines = Path(csv_path).read_text().splitlines()
        assert lines[0] == "t,x,v,density"
        assert len(lines) - 1 == 2001
        t, x, v, rho = (float(f) for f in lines[-1].split(","))
        assert t == pytest.approx(2.0)
        assert rho > 0


@pytest.mark.parametrize("scenario", GOLDEN_SCENARIOS)
def test_golden_report(scenario, tmp_path, monkeypatch):
    """Every registry scenario has a checked-in golden report."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("QWORLDS_PURE_PYTHON", "1")  # backend-independent goldens
    text = golden_report_text(scenario)
    golden = GOLDEN_DIR / f"{scenario}.txt"
    assert golden.exists(), f"missing golden file for {scenario}; run tests/make_goldens.py"
    assert strip_wall_clock(text) == strip_wall_clock(golden.read_text())
