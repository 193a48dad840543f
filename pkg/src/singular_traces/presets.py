"""Named experiment presets kept in YAML (config/experiments.yaml)."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from .arith import Matrix2Z
from .exceptions import ConfigurationError, InvalidArgumentError
from .logging_config import get_logger
from .serialization import parse_matrix

logger = get_logger(__name__)

COMMANDS = ("radial", "funeq")


@dataclass(frozen=True)
class ExperimentPreset:
    """One experiment: which command, on which forms, with which parameters."""

    name: str
    command: str
    forms: List[str]
    description: str = ""
    r: List[str] = field(default_factory=list)
    gamma: Optional[Matrix2Z] = None
    s: List[str] = field(default_factory=list)
    dmax: Optional[int] = None
    schedule: List[float] = field(default_factory=list)
    precision: Optional[int] = None

    @classmethod
    def from_config(cls, name: str, config: Dict[str, Any]) -> "ExperimentPreset":
        """Build a preset from its YAML mapping.

        Raises:
            ConfigurationError: If a required field is missing or malformed.
        """
        if not isinstance(config, dict):
            raise ConfigurationError(f"Preset '{name}' must be a mapping", "PRESETS_INVALID")
        command = config.get("command")
        if command not in COMMANDS:
            raise ConfigurationError(
                f"Preset '{name}' has unknown command {command!r}", "PRESETS_INVALID"
            )
        forms = config.get("forms")
        if not forms:
            raise ConfigurationError(f"Preset '{name}' lists no forms", "PRESETS_INVALID")
        try:
            gamma = parse_matrix(list(config["gamma"])) if "gamma" in config else None
            return cls(
                name=name,
                command=command,
                forms=[str(f) for f in forms],
                description=str(config.get("description", "")),
                r=[str(x) for x in config.get("r", [])],
                gamma=gamma,
                s=[str(x) for x in config.get("s", [])],
                dmax=int(config["dmax"]) if "dmax" in config else None,
                schedule=[float(t) for t in config.get("schedule", [])],
                precision=int(config["precision"]) if "precision" in config else None,
            )
        except (InvalidArgumentError, TypeError, ValueError) as e:
            raise ConfigurationError(
                f"Preset '{name}' is malformed: {e}", "PRESETS_INVALID"
            ) from e


def load_presets(path: Union[str, Path]) -> Dict[str, ExperimentPreset]:
    """Load every preset in a YAML file.

    Raises:
        ConfigurationError: PRESETS_NOT_FOUND for a missing file, PRESETS_INVALID
            for YAML that does not parse or does not describe presets.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Preset file not found: {path}", "PRESETS_NOT_FOUND")
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = yaml.safe_load(file)
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML in {path}: {e}", "PRESETS_INVALID") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path} must map preset names to settings", "PRESETS_INVALID")
    presets = {str(name): ExperimentPreset.from_config(str(name), cfg) for name, cfg in data.items()}
    logger.debug("Loaded %d presets from %s", len(presets), path)
    return presets


def get_preset(name: str, path: Union[str, Path] = "config/experiments.yaml") -> ExperimentPreset:
    """Look up one preset by name.

    Raises:
        InvalidArgumentError: If no preset of that name exists.
    """
    presets = load_presets(path)
    if name not in presets:
        raise InvalidArgumentError(
            f"Preset '{name}' not found. Available presets: {', '.join(sorted(presets))}"
        )
    return presets[name]
