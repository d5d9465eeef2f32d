from pathlib import Path

import pytest

from Functions.Config import RunConfig, build_config, config_from_json, load_run_config, parse_env_file
from Functions.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_defaults_carry_reference_hyperparameters():
    config = load_run_config(environ={})
    assert config.alpha == 0.5
    assert config.lambda1 == 0.01
    assert config.lambda2 == 0.5
    assert config.cmg_mask_ratio == 0.6
    assert config.retrieval_k == (1, 10, 100)
    assert config == RunConfig()


def test_file_env_and_overrides_are_layered(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("# comentario\nSEED=3\nALPHA=0.25  # al final\nCMG_GUIDANCE=no\n", encoding="utf-8")

    config = load_run_config(path, overrides={"seed": "9"}, environ={"MINDKIT_ALPHA": "0.75"})

    assert config.seed == 9
    assert config.alpha == 0.75
    assert config.cmg_guidance is False


def test_coercion_of_tuples_and_scientific_ints():
    config = build_config({"RETRIEVAL_K": "1, 10", "SEMANTIC_EPOCHS": "1e2"})
    assert config.retrieval_k == (1, 10)
    assert config.semantic_epochs == 100


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError, match="NOT_A_KEY"):
        build_config({"NOT_A_KEY": "1"})


def test_all_range_problems_are_reported_together():
    with pytest.raises(ConfigError) as info:
        build_config({"ALPHA": "1.5", "SEMANTIC_BATCH": "0", "CMG_VARIANT": "lstm"})
    message = str(info.value)
    assert "alpha" in message and "semantic_batch" in message and "cmg_variant" in message
    assert info.value.exit_code == 1


def test_patch_must_tile_the_frame():
    with pytest.raises(ConfigError, match="cmg_patch"):
        build_config({"SYNTH_HEIGHT": "32", "SYNTH_WIDTH": "32", "CMG_PATCH": "24"})


def test_unregistered_backend_is_a_config_error():
    with pytest.raises(ConfigError, match="embedder"):
        build_config({"EMBEDDER": "clip-large"})


def test_hash_is_stable_and_sensitive(tiny_config):
    assert tiny_config.config_hash() == build_config(tiny_config.to_dict()).config_hash()
    assert tiny_config.replace(seed=1).config_hash() != tiny_config.config_hash()


def test_config_snapshot_restores_the_same_config(tiny_config):
    assert config_from_json(tiny_config.to_dict()) == tiny_config


def test_env_file_errors(tmp_path):
    with pytest.raises(ConfigError, match="no encontrado"):
        parse_env_file(tmp_path / "missing.env")
    bad = tmp_path / "bad.env"
    bad.write_text("SEED 3\n", encoding="utf-8")
    with pytest.raises(ConfigError, match="Línea 1"):
        parse_env_file(bad)


@pytest.mark.parametrize("name", ["desk_scale.env", "pilot_acceptance.env", "reference_defaults.env"])
def test_shipped_configs_are_valid(name):
    config = load_run_config(CONFIGS / name, environ={})
    assert config.frames_per_clip == 8
