import json

import numpy as np
import pandas as pd
import pytest

from app.config import get_settings
from app.main import main
from app.modules.common.errors import ConfigError, CriterionFailure, ExitCode
from app.modules.reports import service
from app.modules.reports.scenarios import POWER_COLUMNS, SCENARIOS, Scenario, ScenarioOutcome, get_scenario
from app.modules.reports.schemas import ExperimentConfig


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def default_settings(monkeypatch):
    for name in ("LR_N_CALIB", "LR_N_POWER", "LR_CHUNK_SIZE", "LR_MASTER_SEED"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.mark.unit
class TestConfig:
    def test_invalid_json_reports_the_line(self, tmp_path):
        path = _write(tmp_path / "bad.json", '{\n  "alpha": 0.1,\n}\n')
        with pytest.raises(ConfigError) as excinfo:
            service.load_config(path)
        assert excinfo.value.messages[0].startswith("line 3, column 1")
        assert excinfo.value.exit_code is ExitCode.CONFIG_ERROR

    def test_out_of_range_alpha_names_its_line(self, tmp_path):
        path = _write(tmp_path / "alpha.json", '{\n  "scenario": "convex-n1",\n  "alpha": 1.5\n}\n')
        with pytest.raises(ConfigError) as excinfo:
            service.load_config(path)
        assert excinfo.value.messages[0].startswith("line 3: alpha:")

    def test_unknown_keys_are_rejected(self, tmp_path):
        path = _write(tmp_path / "extra.json", '{"alhpa": 0.1}')
        with pytest.raises(ConfigError):
            service.load_config(path)

    def test_unknown_scenario_lists_valid_ids(self):
        with pytest.raises(ConfigError) as excinfo:
            get_scenario("nope")
        assert "convex-n1" in excinfo.value.messages[0]

    def test_problem_configs_are_checked(self):
        with pytest.raises(ValueError):
            ExperimentConfig(problem="location", null="normal", alternatives=["cauchy"], statistics=["avg-lr"])
        with pytest.raises(ValueError):
            ExperimentConfig(problem="symmetric-pair")

    def test_cli_flags_override_the_file(self, tmp_path):
        path = _write(tmp_path / "run.json", '{"scenario": "concave-n1", "alpha": 0.2, "n_calib": 5000}')
        config = service.merge_overrides(service.load_config(path), {"alpha": 0.3, "n_calib": None})
        assert config.alpha == 0.3
        assert config.n_calib == 5000
        with pytest.raises(ConfigError):
            service.merge_overrides(config, {"alpha": 2.0})

    def test_resolution_precedence(self, settings):
        location = service.resolve_run(ExperimentConfig(scenario="location-normal-vs-cauchy"))
        assert location.alpha == 0.05
        assert location.n_calib == 200_000
        convex = service.resolve_run(ExperimentConfig(scenario="convex-n1"))
        assert (convex.alpha, convex.n_calib, convex.seed) == (0.1, 20_000, 7)
        explicit = service.resolve_run(ExperimentConfig(scenario="convex-n1", alpha=0.2, seed=3, n_power=4000))
        assert (explicit.alpha, explicit.seed, explicit.n_power) == (0.2, 3, 4000)
        bare = service.resolve_run(ExperimentConfig(problem="symmetric-pair", shape="concave-sqrt"))
        assert bare.alpha == service.DEFAULT_ALPHA

    def test_quadrature_overrides(self, settings):
        run = service.resolve_run(ExperimentConfig(scenario="convex-n1", quadrature={"abs_tol": 1e-9}))
        assert run.quad.abs_tol == 1e-9
        assert run.quad.rel_tol == settings.quad_rel_tol

    def test_identity_ignores_output_and_workers(self, settings, tmp_path):
        first = service.resolve_run(ExperimentConfig(scenario="convex-n1", output_dir=tmp_path / "a"), workers=1)
        second = service.resolve_run(ExperimentConfig(scenario="convex-n1", output_dir=tmp_path / "b"), workers=4)
        assert first.identity("duel") == second.identity("duel")
        assert first.identity("duel") != first.identity("calibrate")

    def test_config_without_problem_or_scenario(self, settings):
        with pytest.raises(ConfigError):
            service.cmd_calibrate(service.resolve_run(ExperimentConfig()))


@pytest.mark.integration
class TestCommands:
    def test_figure1(self, settings, tmp_path):
        run = service.resolve_run(ExperimentConfig(output_dir=tmp_path))
        meta = service.cmd_figure1(run)
        frame = pd.read_csv(tmp_path / "figure1.csv")
        assert list(frame.columns) == service.FIGURE_COLUMNS
        assert len(frame) == service.FIGURE_POINTS
        assert frame["x"].iloc[0] == pytest.approx(0.0005)
        np.testing.assert_allclose(frame["f"], 3 * frame["x"] ** 2, rtol=1e-8)
        np.testing.assert_allclose(frame["g"], 3 * (1 - frame["x"]) ** 2, rtol=1e-8)
        middle = frame.iloc[499]
        assert middle["x"] == pytest.approx(0.4995)
        assert middle["f"] == pytest.approx(0.75, abs=5e-3)
        assert meta["grid_points"] == 1000
        assert meta["alpha"] == service.FIGURE_ALPHA
        assert meta["f_endpoints"] == pytest.approx([0.0, 3.0])
        assert meta["g_endpoints"] == pytest.approx([3.0, 0.0])
        regions = pd.read_csv(tmp_path / "figure1_regions.csv")
        assert set(regions["test"]) == {"max_lr", "avg_lr"}
        assert (tmp_path / "manifest.json").exists()

    def test_calibrate_is_reproducible(self, settings, tmp_path):
        outputs = []
        for name in ("a", "b"):
            run = service.resolve_run(ExperimentConfig(scenario="convex-n1", output_dir=tmp_path / name))
            payload = service.cmd_calibrate(run)
            outputs.append((tmp_path / name / "calibration.json").read_bytes())
        assert outputs[0] == outputs[1]
        max_lr = next(record for record in payload["tests"] if record["calibration"].statistic.identifier == "max-lr")
        (lo0, hi0), (lo1, hi1) = max_lr["region"]
        assert (lo0, hi1) == (0.0, 1.0)
        assert hi0 == pytest.approx(0.05, abs=0.01)
        assert lo1 == pytest.approx(0.95, abs=0.01)

    def test_duel_does_not_depend_on_workers(self, settings, tmp_path):
        for workers in (1, 2):
            run = service.resolve_run(ExperimentConfig(scenario="convex-n1", output_dir=tmp_path / str(workers)), workers=workers)
            service.cmd_duel(run)
        for name in ("duel.json", "duel.csv"):
            assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "2" / name).read_bytes()
        header = (tmp_path / "1" / "duel.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header == ",".join(POWER_COLUMNS)
        manifest = json.loads((tmp_path / "1" / "manifest.json").read_text(encoding="utf-8"))
        assert "calibration" in manifest["substreams"]

    def test_reproduce_discrete_oracle(self, settings, tmp_path):
        run = service.resolve_run(ExperimentConfig(scenario="discrete-oracle", output_dir=tmp_path))
        summary = service.cmd_reproduce(run)
        assert summary.passed
        assert (tmp_path / "discrete.csv").exists()
        records = json.loads((tmp_path / "records.json").read_text(encoding="utf-8"))
        assert records["power_range_concave-sqrt"]["max_blocks"] == [5]

    def test_failed_criterion_raises(self, settings, tmp_path, mocker):
        def run_broken(ctx):
            outcome = ScenarioOutcome()
            outcome.check("always-fails", False, value=1.0, threshold=0.0)
            return outcome

        broken = Scenario("broken", "fails on purpose", 0.1, run_broken, lambda alpha, quad: [])
        mocker.patch.dict(SCENARIOS, {"broken": broken})
        run = service.resolve_run(ExperimentConfig(scenario="broken", output_dir=tmp_path))
        with pytest.raises(CriterionFailure) as excinfo:
            service.cmd_reproduce(run)
        assert excinfo.value.failed == ["always-fails"]
        assert excinfo.value.exit_code is ExitCode.CRITERION_FAILED
        assert json.loads((tmp_path / "summary.json").read_text(encoding="utf-8"))["passed"] is False

    def test_verify_density_truncates_unbounded_families(self, settings, tmp_path):
        report = service.cmd_verify_density("normal", tmp_path, ks_draws=0)
        assert report.passed
        assert report.truncated
        assert (tmp_path / "verify_density.json").exists()
        with pytest.raises(ConfigError):
            service.density_for("gamma")


@pytest.mark.functional
class TestEntrypoint:
    def test_unknown_scenario_exits_with_config_error(self, settings, capsys, mocker):
        mocker.patch("app.main.configure_logging")
        assert main(["reproduce", "--scenario", "nope"]) == ExitCode.CONFIG_ERROR
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error"] == "ConfigError"
        assert error["exit_code"] == 2

    def test_verify_density_command(self, settings, capsys, mocker, tmp_path):
        mocker.patch("app.main.configure_logging")
        code = main(["verify-density", "--family", "convex-3x2", "--ks-draws", "0", "--out", str(tmp_path)])
        assert code == ExitCode.OK
        assert "convex-3x2" in capsys.readouterr().out

    def test_bad_seed_is_rejected_by_the_parser(self, settings, mocker):
        mocker.patch("app.main.configure_logging")
        with pytest.raises(SystemExit):
            main(["duel", "--scenario", "convex-n1", "--seed", "-1"])


@pytest.mark.slow
@pytest.mark.parametrize("scenario_id", ["convex-n1", "concave-n1", "increasing-n1", "mixture-sweep"])
def test_bundled_scenario_passes(default_settings, tmp_path, scenario_id):
    run = service.resolve_run(ExperimentConfig(scenario=scenario_id, output_dir=tmp_path, n_power=200_000))
    assert service.cmd_reproduce(run).passed
