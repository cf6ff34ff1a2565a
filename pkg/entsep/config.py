"""
Run configuration: defaults, named presets, JSON files and CLI overrides.

Precedence, lowest first: dataclass defaults, preset, config file, flags.
Unknown keys at any level are rejected so typos never pass silently.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional

from entsep.errors import ConfigError
from entsep.models.analysis import OptimizerConfig
from entsep.models.decomposition import BsaConfig
from entsep.models.dynamics import DynamicsConfig, LindbladModel

logger = logging.getLogger(__name__)

MODES = ("k-sep", "bisep-augmented", "custom")


@dataclass(frozen=True)
class RunConfig:
    """
    Everything a command needs besides its input file.

    Attributes:
        seed: Root seed of the random stream.
        mode: Separability mode name.
        custom_groupings: Groupings for mode "custom", e.g. [[[0], [1, 2]]].
        threads: Worker threads for the parallel stages.
        out_dir: Directory for result files.
        samples: Number of β-distribution samples (0 disables the CSV).
        bsa: Decomposition settings.
        optimizer: Product-state search settings.
        model: Relaxation model.
        dynamics: Integration and analysis settings.
    """

    seed: int = 0
    mode: str = "k-sep"
    custom_groupings: Optional[List[List[List[int]]]] = None
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)
    out_dir: str = "."
    samples: int = 0
    bsa: BsaConfig = field(default_factory=BsaConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    model: LindbladModel = field(default_factory=LindbladModel)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode '{self.mode}' (expected one of {', '.join(MODES)})")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.samples < 0:
            raise ConfigError("samples must be >= 0")

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["model"] = self.model.to_dict()
        return out


# With f4 = f6 = f the GHZ-like state couples only to |210⟩, at rate √2·f.
# Mixed half and half with I/12 it is genuinely entangled near the GHZ-like
# state and fully separable near |210⟩, so B dies and revives with period
# π/(√2·f).
PRESETS: Dict[str, Dict[str, Any]] = {
    "fig3-like": {
        "mode": "bisep-augmented",
        "model": {
            "f": [0.0, 0.0, 0.0],
            "f4": 0.6,
            "f6": 0.6,
            "eps1": 0.0,
            "eps2": 0.0,
            "noise_cov": [[0.002, 0.0, 0.0], [0.0, 0.002, 0.0], [0.0, 0.0, 0.002]],
        },
        "dynamics": {
            "dt": 1e-3,
            "t_end": 25.0,
            "stride": 50,
            "initial_state": "ghz-like",
            "initial_mixing": 0.5,
        },
        "bsa": {
            "sample_factor": 2,
            "sample_cap": 600,
            "width_0": 0.02,
            "width_floor": 5e-3,
            "max_iterations": 60,
        },
    },
}

_NESTED = {
    "bsa": BsaConfig,
    "optimizer": OptimizerConfig,
    "model": LindbladModel,
    "dynamics": DynamicsConfig,
}


def _check_keys(cls, data: Dict[str, Any], where: str) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be a JSON object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        prefix = f"{where}." if where else ""
        raise ConfigError(f"unknown config key '{prefix}{unknown[0]}'")


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in update.items():
        if key in _NESTED and isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = {**out[key], **value}
        else:
            out[key] = value
    return out


def config_from_dict(data: Dict[str, Any]) -> RunConfig:
    """
    Build a RunConfig from plain JSON data.

    Raises:
        ConfigError: On unknown keys or invalid values.
    """
    _check_keys(RunConfig, data, "")
    kwargs: Dict[str, Any] = {}
    for key, value in data.items():
        if key in _NESTED:
            cls = _NESTED[key]
            _check_keys(cls, value, key)
            try:
                kwargs[key] = cls(**value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid '{key}' section: {exc}") from exc
        else:
            kwargs[key] = value
    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def preset(name: str) -> Dict[str, Any]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(sorted(PRESETS))})")
    return PRESETS[name]


def load_config(path: Optional[Path] = None, preset_name: Optional[str] = None) -> RunConfig:
    """
    Defaults, then the preset, then the JSON file at ``path``.

    Raises:
        ConfigError: If the file cannot be parsed or holds invalid settings.
    """
    data: Dict[str, Any] = {}
    if preset_name:
        data = _merge(data, preset(preset_name))
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
            data = _merge(data, json.loads(text))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    config = config_from_dict(data)
    logger.debug("loaded config (preset=%s, file=%s)", preset_name, path)
    return config


def with_overrides(config: RunConfig, **flags: Any) -> RunConfig:
    """Replace top-level fields by every flag that is not None."""
    updates = {k: v for k, v in flags.items() if v is not None}
    for key in updates:
        if key not in {f.name for f in fields(RunConfig)} or is_dataclass(getattr(config, key)):
            raise ConfigError(f"cannot override '{key}' from the command line")
    return replace(config, **updates) if updates else config
