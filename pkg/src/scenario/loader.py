"""Scenario configuration files: loading, validation and the config echo."""
import json
import logging
from pathlib import Path

from pydantic import ValidationError

from src.errors import ConfigError
from src.scenario.presets import PRESETS, preset
from src.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)


def _format_validation(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(tree: dict, source: str = "<config>") -> ScenarioConfig:
    """Validate a JSON-compatible tree."""
    try:
        return ScenarioConfig.model_validate(tree)
    except ValidationError as e:
        raise ConfigError(f"{source}: invalid scenario: {_format_validation(e)}") from e


def load_config(path_or_preset: str | Path) -> ScenarioConfig:
    """Load a JSON scenario file, or a bundled preset by name."""
    name = str(path_or_preset)
    if name in PRESETS:
        logger.debug(f"Loading bundled preset {name}")
        return parse_config(preset(name), name)

    path = Path(path_or_preset)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    try:
        tree = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: parse error at line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(tree, dict):
        raise ConfigError(f"{path}: top level must be an object, got {type(tree).__name__}")
    cfg = parse_config(tree, str(path))
    logger.info(f"Loaded scenario '{cfg.name}' from {path}")
    return cfg


def config_echo(cfg: ScenarioConfig, seed: int | None = None) -> dict:
    """Effective configuration with every default resolved; ``seed`` pins the run seed."""
    tree = cfg.model_dump(mode="json")
    if seed is not None:
        tree["seed"] = seed
    return tree


def save_config(cfg: ScenarioConfig, path: str | Path, seed: int | None = None) -> Path:
    """Write the config echo; loading it back gives an identical configuration."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config_echo(cfg, seed), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
