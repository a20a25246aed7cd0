"""Tests for scenario loading, assembly, deterministic runs and output files."""
import csv
import json
import logging

import numpy as np
import pytest

from src.errors import ConfigError
from src.scenario import (
    PRESETS,
    emit_outputs,
    load_config,
    parse_config,
    preset,
    run_scenario,
    save_config,
    seconds_to_steps,
    trajectory_columns,
)
from src.scenario.experiments import far_bound, reproduce
from src.schemas.scenario import DetectorScheduleConfig, DetectorsConfig, GlrConfig
from src.services import DetectorScheduler


@pytest.fixture(scope="module")
def short_run(robotino_cfg):
    return run_scenario(robotino_cfg, seed=21, steps=300)


class TestLoading:

    @pytest.mark.parametrize("name", sorted(PRESETS))
    def test_presets_validate(self, name):
        assert load_config(name).name == name

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="config file not found"):
            load_config(tmp_path / "absent.json")

    def test_parse_error_position(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x",\n  "duration": }', encoding="utf-8")
        with pytest.raises(ConfigError, match="parse error at line 2"):
            load_config(path)

    def test_invalid_tree(self):
        tree = preset("robotino.nominal")
        del tree["Q_r2"]
        with pytest.raises(ConfigError, match="invalid scenario: Q_r2"):
            parse_config(tree)

    def test_window_beyond_duration(self):
        tree = preset("robotino.attack")
        tree["duration"] = 120.0
        with pytest.raises(ConfigError, match="exceeds the run length"):
            parse_config(tree)

    def test_pdd_detectors_need_schedule(self):
        tree = preset("robotino.nominal")
        tree["detectors"]["additive"] = True
        with pytest.raises(ConfigError, match="detector schedule"):
            parse_config(tree)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown preset"):
            preset("robotino.flying")

    def test_save_and_reload(self, tmp_path, robotino_cfg):
        path = save_config(robotino_cfg, tmp_path / "echo.json", seed=77)
        reloaded = load_config(path)
        assert reloaded.seed == 77
        assert reloaded.model_dump(exclude={"seed"}) == robotino_cfg.model_dump(exclude={"seed"})


class TestTiming:

    def test_exact_multiple(self):
        assert seconds_to_steps(20.0, 0.1) == 200

    def test_fraction_rounds_down(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert seconds_to_steps(0.15, 0.1, "start") == 1
        assert "rounded down" in caplog.text


class TestRun:

    def test_shapes(self, short_run):
        assert short_run.steps == 300
        assert short_run.u.shape == (300, 3)
        np.testing.assert_allclose(short_run.t[:3], [0.0, 0.1, 0.2])

    def test_deterministic_for_seed(self, robotino_cfg, short_run):
        again = run_scenario(robotino_cfg, seed=21, steps=300)
        np.testing.assert_array_equal(again.u, short_run.u)
        np.testing.assert_array_equal(again.r_yu, short_run.r_yu)
        assert [v.statistic for v in again.verdicts] == [v.statistic for v in short_run.verdicts]
        other = run_scenario(robotino_cfg, seed=22, steps=300)
        assert not np.array_equal(other.y, short_run.y)

    def test_attack_free_false_alarms(self, short_run):
        rate, n = short_run.alarm_rate("attack_chi2")
        assert n == 300
        assert rate <= far_bound(0.01, n)

    def test_noise_free_residual(self):
        tree = preset("robotino.nominal")
        tree["noise"] = {"process": 0.0, "measurement": 0.0}
        tree["gains"]["L"] = np.zeros((3, 3)).tolist()
        tree["detectors"]["Sigma_ry"] = np.eye(3).tolist()
        log = run_scenario(parse_config(tree), seed=1, steps=250)
        assert np.abs(log.r_y).max() < 1e-9

    def test_traditional_has_no_fused_residual(self):
        cfg = load_config("robotino.traditional").model_copy(update={"attacks": []})
        log = run_scenario(cfg, seed=2, steps=50)
        assert np.isnan(log.r_yu).all()
        assert {v.detector for v in log.verdicts} == {"kalman_chi2"}


class TestSchedule:

    @pytest.fixture(scope="class")
    def scheduled(self):
        cfg = load_config("robotino.covert").model_copy(update={
            "attacks": [],
            "detectors": DetectorsConfig(
                additive=True,
                glr=GlrConfig(N=50, threshold=50.0, calibration_time=30.0),
                schedule=DetectorScheduleConfig(),
            ),
        })
        return run_scenario(cfg, seed=5, steps=600)

    def test_dwell_pattern(self, scheduled):
        expected = [(k % 250) >= 150 for k in range(600)]
        assert scheduled.pdd.tolist() == expected

    def test_families_see_their_own_phase(self, scheduled):
        for v in scheduled.verdicts_of("attack_chi2"):
            assert v.k0 % 250 < 150
        assert all(150 <= v.k0 % 250 < 200 for v in scheduled.verdicts_of("additive_chi2"))
        # the GLR window restarts with the PDD block and spans the additive phase
        glr = [v.k0 for v in scheduled.verdicts_of("glr")]
        assert glr == list(range(151, 201)) + list(range(401, 451))

    def test_dwell_counts(self):
        counts = DetectorScheduler(150, 50, 50).dwell_counts(600)
        assert list(counts.values()) == [400, 100, 100]


class TestOutputs:

    def test_empty_run_writes_headers(self, tmp_path, robotino_cfg):
        log = run_scenario(robotino_cfg, seed=3, steps=0)
        files = emit_outputs(log, tmp_path)
        lines = files["trajectories"].read_text(encoding="utf-8").splitlines()
        assert lines == [",".join(trajectory_columns(3, 3))]
        assert len(files["verdicts"].read_text(encoding="utf-8").splitlines()) == 1

    def test_columns_and_rows(self, tmp_path, short_run):
        files = emit_outputs(short_run, tmp_path)
        with open(files["trajectories"], encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == trajectory_columns(3, 3)
        assert len(rows) == 301
        assert float(rows[5][rows[0].index("u1")]) == short_run.u[4, 0]
        config = json.loads(files["config"].read_text(encoding="utf-8"))
        assert config["seed"] == 21

    def test_reemit_is_byte_identical(self, tmp_path, robotino_cfg, short_run):
        first = emit_outputs(short_run, tmp_path / "a")
        second = emit_outputs(run_scenario(robotino_cfg, seed=21, steps=300), tmp_path / "b")
        for key, path in first.items():
            assert path.read_bytes() == second[key].read_bytes(), key


class TestExperiments:

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment 'E9'"):
            reproduce("E9")

    def test_far_bound(self):
        assert far_bound(0.01, 10000) == pytest.approx(0.01 + 3.0 * np.sqrt(0.0099 / 10000))


@pytest.mark.slow
class TestReproduction:

    KEY_CHECKS = {
        "E1": {"chi2_threshold", "gamma_theta_a_ftc", "fault_detection_rate"},
        "E2": {"attack_detection_rate", "gamma_theta_a_resilient"},
        "E3": {"ncx2_quantile", "switch_on_delay_s", "switch_off_delay_s", "attacked_detection_rate"},
        "E4": {"traditional_alarm_rate", "modified_alarm_rate", "plant_residual_gap"},
        "E5": {"regular_alarm_rate", "additive_detection_rate", "deviation_over_baseline"},
        "E6": {"glr_detection_rate", "covert_additive_detection_rate"},
    }

    @pytest.mark.parametrize("experiment", ["E1", "E2", "E3", "E4", "E5", "E6"])
    def test_every_check_passes(self, experiment):
        log, summary = reproduce(experiment)
        names = {c.name for c in summary.checks}
        assert self.KEY_CHECKS[experiment] <= names
        failed = [f"{c.name}={c.value}" for c in summary.checks if not c.passed]
        assert not failed, failed
        assert log.steps > 0

    def test_covert_attack_stays_below_false_alarm_bound(self):
        tree = preset("robotino.covert")
        tree["duration"] = 600.0
        tree["attacks"][0]["window"] = {"start": 5.0, "end": 600.0}
        tree["detectors"] = {"alpha": 0.01, "attack_chi2": True}
        log = run_scenario(parse_config(tree), seed=8)
        rate, n = log.alarm_rate("attack_chi2", 50)
        assert n >= 5000
        assert rate <= far_bound(0.01, n)
        assert np.abs(log.a_plant[50:]).max() > 0.01


@pytest.mark.slow
def test_kalman_residual_ignores_attacks():
    """r_y only sees noise and faults, whatever reaches the plant input."""
    base = run_scenario(load_config("robotino.nominal"), seed=31, steps=2000)
    for name in ("robotino.attack", "robotino.covert"):
        attacked = run_scenario(load_config(name), seed=31, steps=2000)
        assert np.abs(attacked.u - base.u).max() > 1e-6
        np.testing.assert_allclose(attacked.r_y, base.r_y, rtol=0.0, atol=1e-12)
