"""Unit tests for the configuration module."""
# pyright: basic

import pytest
from pytest_mock import MockerFixture

from gqla.config import (
    get_presets,
    load_training_config,
    parse_overrides,
    resolve_training_config,
)
from gqla.core import GqlaError
from gqla.platform.assets import get_asset_path

from .doubles.config import DUMMY_CONFIG_FILE, get_dummy_config, tiny_config


@pytest.fixture
def config_file(fs):
    return get_dummy_config(fs)


def test_load_training_config_reads_file(config_file):
    cfg = load_training_config(config_file)

    assert cfg.dims.n == 7
    assert cfg.threshold_t == 5
    assert cfg.val_max_blocks == 200
    assert cfg.optimizer == "mb_gqla_update_matrix"


def test_load_training_config_applies_overrides_last(config_file):
    cfg = load_training_config(config_file, {"alpha": 3.5, "threshold_T": 7})

    assert cfg.alpha == 3.5
    assert cfg.threshold_t == 7


def test_load_training_config_missing_file(fs):
    with pytest.raises(GqlaError) as e:
        load_training_config("/runs/absent.yml")

    assert e.value.category == "config"


def test_load_training_config_rejects_invalid_yaml(fs):
    fs.create_file(DUMMY_CONFIG_FILE, contents="n: [7\n")

    with pytest.raises(GqlaError) as e:
        load_training_config(DUMMY_CONFIG_FILE)

    assert "not valid YAML" in e.value.message


def test_load_training_config_rejects_non_mapping(fs):
    fs.create_file(DUMMY_CONFIG_FILE, contents="- 1\n- 2\n")

    with pytest.raises(GqlaError):
        load_training_config(DUMMY_CONFIG_FILE)


def test_preset_layer_is_below_file_and_overrides():
    cfg = resolve_training_config({"preset": "32x16", "alpha": 2.7}, {"n_errors": 3})

    assert (cfg.n, cfg.k) == (32, 16)
    assert cfg.threshold_t == 30
    assert cfg.init_density == 0.45
    assert cfg.alpha == 2.7
    assert cfg.n_errors == 3


def test_packaged_presets_are_valid():
    presets = get_presets()

    assert {"32x16", "64x32", "64x16", "128x64", "64x16-dsf"} <= set(presets)
    for name in presets:
        resolve_training_config({"preset": name})


def test_unknown_preset():
    with pytest.raises(GqlaError) as e:
        resolve_training_config({"preset": "1024x512"})

    assert "Unknown preset" in e.value.message


def test_missing_keys_are_named():
    with pytest.raises(GqlaError) as e:
        resolve_training_config({"n": 7, "k": 4})

    assert "missing keys" in e.value.message
    assert "alpha" in e.value.message
    assert "val_ebno_db" in e.value.message


@pytest.mark.parametrize(
    "overrides, fragment",
    [
        ({"k": 7}, "0 < k < n"),
        ({"n_errors": 9}, "exceeds n"),
        ({"patience": 5, "max_epochs": 2}, "patience"),
        ({"init_density": 1.5}, "init_density"),
        ({"optimizer": "adam"}, "optimizer"),
        ({"colour": "red"}, "colour"),
    ],
)
def test_invalid_values_are_reported(overrides, fragment):
    values = tiny_config().model_dump()

    with pytest.raises(GqlaError) as e:
        resolve_training_config(values, overrides)

    assert e.value.category == "config"
    assert fragment in e.value.message


def test_block_counts_accept_float_notation():
    cfg = resolve_training_config(tiny_config().model_dump(), {"val_max_blocks": 1e6})

    assert cfg.val_max_blocks == 1_000_000


def test_derived_settings():
    cfg = tiny_config(
        gradient_mode="exact", train_iterations=2, val_iterations=6, optimizer="dsf"
    )

    assert cfg.train_bp.iterations == 2
    assert cfg.train_bp.gradient_mode == "exact"
    assert cfg.val_bp.iterations == 6
    assert cfg.optimizer_spec.variant == "dsf"
    assert cfg.error_pattern.n_errors == 1
    assert cfg.density.p == 0.0


def test_parse_overrides_reads_yaml_scalars():
    overrides = parse_overrides(["alpha=2.5", "n_errors=3", "optimizer=dsf", "x="])

    assert overrides == {"alpha": 2.5, "n_errors": 3, "optimizer": "dsf", "x": None}


@pytest.mark.parametrize("pair", ["alpha", "=3", "a=[1"])
def test_parse_overrides_rejects_bad_pairs(pair):
    with pytest.raises(GqlaError):
        parse_overrides([pair])


def test_load_training_config_uses_packaged_presets(mocker: MockerFixture):
    toy = {
        "n": 7,
        "k": 4,
        "alpha": 1.0,
        "n_errors": 1,
        "threshold_t": 3,
        "init_density": 0.2,
        "val_ebno_db": 1.0,
        "max_epochs": 4,
        "patience": 2,
    }
    presets = mocker.patch("gqla.config.get_presets", return_value={"toy": toy})

    cfg = load_training_config(None, {"preset": "toy"})

    presets.assert_called_once()
    assert cfg.threshold_t == 3
    assert cfg.preset == "toy"


def test_packaged_example_config_is_valid():
    cfg = load_training_config(get_asset_path("train.yml"), {"seed": 3})

    assert cfg.preset == "32x16"
    assert (cfg.n, cfg.k) == (32, 16)
    assert cfg.max_epochs == 256
    assert cfg.seed == 3
