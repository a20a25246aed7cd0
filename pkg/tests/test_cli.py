"""Tests for the command-line entry point."""
import json

import pytest

from src.main import build_parser, main


class TestParser:

    def test_common_options(self):
        args = build_parser().parse_args(["simulate", "robotino.nominal", "--seed", "5", "--steps", "10"])
        assert (args.command, args.config, args.seed, args.steps) == ("simulate", "robotino.nominal", 5, 10)

    def test_reproduce_accepts_several(self):
        args = build_parser().parse_args(["reproduce", "E1", "e3", "--workers", "2"])
        assert args.experiments == ["E1", "e3"]
        assert args.workers == 2

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestMain:

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["simulate", str(tmp_path / "nope.json")]) == 1
        assert "config file not found" in capsys.readouterr().err

    def test_unknown_experiment(self, capsys):
        assert main(["reproduce", "E7"]) == 1
        assert "unknown experiment(s) E7" in capsys.readouterr().err

    def test_verify_bezout(self, capsys):
        assert main(["verify-bezout", "robotino.nominal"]) == 0
        line = capsys.readouterr().out.strip()
        assert line.startswith("max Bezout deviation = ")
        assert float(line.split("=")[1]) < 1e-9

    def test_factorize(self, capsys):
        assert main(["factorize", "robotino.nominal"]) == 0
        tree = json.loads(capsys.readouterr().out)
        assert tree["plant"] == {"states": 3, "inputs": 3, "outputs": 3}
        assert all(f["stability_margin"] > 0.0 for f in tree["factors"].values())

    def test_postfilter_needs_modified(self, capsys):
        assert main(["design-postfilter", "robotino.traditional"]) == 1
        assert "modified configuration" in capsys.readouterr().err

    def test_check_performance(self, capsys):
        assert main(["check-performance", "robotino.nominal", "--target-theta-a", "0.5"]) == 0
        assert "gamma_theta_a" in capsys.readouterr().out

    def test_simulate_writes_outputs(self, tmp_path, capsys):
        assert main(["simulate", "robotino.nominal", "--steps", "20", "--seed", "3", "--out", str(tmp_path)]) == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert {"trajectories.csv", "verdicts.csv", "report.txt", "config.json"} <= names
        assert "20 steps" in capsys.readouterr().out
