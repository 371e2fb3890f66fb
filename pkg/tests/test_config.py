"""
Tests for run configuration: defaults, validation, files and environment
"""

import json
import math

import pytest

from src.config import (
    OUTPUT_DIR_ENV,
    SKEWED_MIXTURE,
    RunConfig,
    apply_environment,
    dyadic_range,
    load_config,
    parse_ns,
)
from src.errors import ConfigError, InvalidParameterError


def test_defaults():
    config = RunConfig()
    assert config.families == [SKEWED_MIXTURE]
    assert config.ns == [8, 16, 32, 64, 128, 256, 512]
    assert config.u == pytest.approx(math.sqrt(1.5))
    assert config.k == 2
    assert config.formats == ["csv", "json", "svg"]
    assert config.specs()[0].raw_moment(3) == pytest.approx(0.75)


def test_sample_size_parsing():
    assert parse_ns("8:64") == [8, 16, 32, 64]
    assert parse_ns("8,12,20") == [8, 12, 20]
    assert dyadic_range(3, 3) == [3]
    with pytest.raises(InvalidParameterError):
        parse_ns("a:b")
    with pytest.raises(InvalidParameterError):
        dyadic_range(0, 4)


@pytest.mark.parametrize(
    "overrides",
    [
        {"delta1": 0.0},
        {"u": 1.5},
        {"k": 3},
        {"workers": 0},
        {"formats": ["png"]},
        {"ns": [8, 4]},
        {"ns": [8192]},
        {"families": ["cauchy:1"]},
        {"method": "fast"},
        {"L": -1.0},
    ],
)
def test_invalid_settings(overrides):
    with pytest.raises(InvalidParameterError):
        RunConfig(**overrides)


def test_with_overrides_ignores_none():
    config = RunConfig().with_overrides(n=64, u=None, workers=None)
    assert config.n == 64
    assert config.u == RunConfig().u


def test_from_dict_rejects_bad_documents():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"n": 4})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"schema": 2})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"schema": 1, "colour": "blue"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"schema": 1, "families": "laplace:1"})
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])


@pytest.mark.parametrize("name", ["run.json", "run.yaml"])
def test_dump_and_load(tmp_path, name):
    config = RunConfig(families=["laplace:1", SKEWED_MIXTURE], ns=[4, 8, 16, 32], k=1)
    path = config.dump(tmp_path / name)
    assert load_config(path) == config


def test_dumped_json_is_sorted_and_versioned(tmp_path):
    data = json.loads(RunConfig().dump(tmp_path / "run.json").read_text())
    assert data["schema"] == 1
    assert list(data) == sorted(data)


def test_unparseable_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_environment_overrides_output_dir(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "env-out"))
    assert apply_environment(RunConfig()).output_dir == str(tmp_path / "env-out")
