# tests/test_config.py
import json

import pytest

from entsep.config import RunConfig, config_from_dict, load_config, with_overrides
from entsep.errors import ConfigError


def test_defaults():
    config = load_config()

    assert config == RunConfig(threads=config.threads)
    assert config.mode == "k-sep"
    assert config.bsa.sample_factor == 20 and config.bsa.sample_cap == 4000
    assert config.dynamics.stride == 50


def test_unknown_keys_are_rejected():
    """Typos fail loudly, with the dotted path of the offending key."""
    with pytest.raises(ConfigError, match="unknown config key 'sede'"):
        config_from_dict({"sede": 1})
    with pytest.raises(ConfigError, match="unknown config key 'bsa.widht_0'"):
        config_from_dict({"bsa": {"widht_0": 0.1}})


def test_invalid_values_are_config_errors():
    with pytest.raises(ConfigError, match="unknown mode"):
        config_from_dict({"mode": "w-class"})
    with pytest.raises(ConfigError, match="invalid 'model' section"):
        config_from_dict({"model": {"noise_cov": [[1, 0, 0], [0, -1, 0], [0, 0, 0]]}})
    with pytest.raises(ConfigError, match="width_decay"):
        config_from_dict({"bsa": {"width_decay": 1.5}})
    with pytest.raises(ConfigError, match="initial_mixing"):
        config_from_dict({"dynamics": {"initial_mixing": 1.0}})
    with pytest.raises(ConfigError, match="pricing_sweeps"):
        config_from_dict({"bsa": {"pricing_sweeps": 0}})


def test_preset_then_file(tmp_path):
    """A file entry overrides one preset key and keeps its siblings."""
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 7, "bsa": {"max_iterations": 10}}))
    config = load_config(path, "fig3-like")

    assert config.seed == 7
    assert config.mode == "bisep-augmented"
    assert config.model.f4 == pytest.approx(0.6)
    assert config.bsa.max_iterations == 10
    assert config.bsa.sample_cap == 600
    assert config.dynamics.initial_mixing == pytest.approx(0.5)


def test_unreadable_files(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")

    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(broken)
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    with pytest.raises(ConfigError, match="unknown preset"):
        load_config(preset_name="fast")


def test_flag_overrides():
    config = with_overrides(RunConfig(), seed=5, mode=None, out_dir="results")

    assert config.seed == 5
    assert config.mode == "k-sep"
    assert config.out_dir == "results"
    with pytest.raises(ConfigError, match="cannot override"):
        with_overrides(config, bsa={})


def test_to_dict_roundtrip():
    config = load_config(preset_name="fig3-like")
    assert config_from_dict(config.to_dict()) == config
