import pytest

from reactmix.config import (
    ExperimentConfig,
    apply_overrides,
    config_hash,
    from_dict,
    load_config,
    parse_value,
)
from reactmix.errors import ConfigError


def test_defaults_validate():
    cfg = load_config()
    assert cfg.kind == "simulate" and cfg.n == 64


def test_yaml_file_and_overrides(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("kind: ed-rate-sweep\nn: 32\nnu_list: [1e-3, 3e-4]\nflow:\n  amplitude: 2\n")
    cfg = load_config(path, ["n=64", "flow.amplitude=0.5", "n=128"])
    assert cfg.n == 128
    assert cfg.nu_list == [1e-3, 3e-4]
    assert cfg.flow.amplitude == 0.5


def test_exponent_without_dot_is_float():
    assert parse_value("1e-3") == 1e-3
    assert parse_value("[1e-3, 2]") == [1e-3, 2]
    assert parse_value("true") is True
    assert parse_value("shear") == "shear"


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError) as info:
        load_config(None, ["bogus=1"])
    assert "valid keys" in str(info.value) and "nu_list" in str(info.value)
    with pytest.raises(ConfigError):
        load_config(None, ["flow.speed=1"])


def test_yaml_error_reports_position(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("n: 32\nnu: [1\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert "line" in str(info.value) and "column" in str(info.value)


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.yaml")


@pytest.mark.parametrize(
    "override",
    ["n=48", "nu=0", "eps=2", "kind=dance", "fit_window=[0.5,0.2]", "samples=3", "K_list=[-1]", "j_list=[0]",
     "jobs=0", "n=abc", "control=3"],
)
def test_invalid_values(override):
    with pytest.raises(ConfigError):
        load_config(None, [override])


def test_override_syntax():
    with pytest.raises(ConfigError):
        apply_overrides({}, ["nokey"])
    with pytest.raises(ConfigError):
        apply_overrides({"n": 3}, ["n.sub=1"])
    assert apply_overrides({}, ["a.b.c=2"]) == {"a": {"b": {"c": 2}}}


def test_hash_is_stable_and_sensitive():
    a = from_dict(ExperimentConfig, {"n": 32})
    b = from_dict(ExperimentConfig, {"n": 32})
    c = from_dict(ExperimentConfig, {"n": 64})
    assert config_hash(a) == config_hash(b) != config_hash(c)
    assert len(config_hash(a)) == 16
