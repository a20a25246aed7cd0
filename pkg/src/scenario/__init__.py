"""Scenario configuration, execution, experiment reproduction and output emission."""
from .builders import ReconfigurationPlan, ScenarioAssembly, assemble, seconds_to_steps
from .experiments import EXPERIMENTS, reproduce
from .loader import config_echo, load_config, parse_config, save_config
from .outputs import emit_outputs, render_report, trajectory_columns
from .presets import PRESETS, preset
from .runner import RunLog, calibrate_pdd, run_scenario

__all__ = [
    "PRESETS",
    "preset",
    "load_config",
    "parse_config",
    "save_config",
    "config_echo",
    "seconds_to_steps",
    "assemble",
    "ScenarioAssembly",
    "ReconfigurationPlan",
    "RunLog",
    "run_scenario",
    "calibrate_pdd",
    "EXPERIMENTS",
    "reproduce",
    "emit_outputs",
    "render_report",
    "trajectory_columns",
]
