import numpy as np
import pytest

from Functions.DataIO import write_arrays
from Functions.Generator import (
    GenerationRequest,
    ToyFrameGenerator,
    ground_truth_reconstructions,
    inflate_attention_kv,
    inflated_attention,
    parse_substitutions,
    read_frame_png,
    read_reconstructions,
    reconstruct_dataset,
    reconstruct_video,
    sample_manifest,
    write_reconstructions,
)
from Functions.MotionGenerator import train_cmg, train_perframe
from Functions.SemanticDecoder import train_semantic
from Functions.StructureDecoder import train_structure
from Functions.errors import ConfigError, GenerationError

CONDITION = np.zeros((20, 768), dtype=np.float32)


class _BrokenGenerator:
    name = "broken"

    def generate(self, latents, condition, seed, tokenizer, smoothing_steps=0, inversion_steps=0):
        if seed >= 2:
            raise RuntimeError("sin memoria")
        return np.zeros((1, 3, 32, 32), dtype=np.float32)


class _WrongShapeGenerator:
    name = "wrong-shape"

    def generate(self, latents, condition, seed, tokenizer, smoothing_steps=0, inversion_steps=0):
        return np.zeros((1, 3, 16, 16), dtype=np.float32)


@pytest.fixture(scope="module")
def trained_states(prepared_splits, tiny_config, embedder, conditioner, tokenizer):
    train = prepared_splits[0]
    return {
        "semantic": train_semantic(train, tiny_config, embedder, conditioner, seed=0),
        "structure": train_structure(train, tiny_config, tokenizer, seed=0),
        "cmg": train_cmg(train, tokenizer, tiny_config, seed=0),
        "perframe": train_perframe(train, tokenizer, tiny_config, seed=0),
    }


class TestReconstructVideo:
    def test_true_tokens_give_back_the_clip(self, raw_splits, tokenizer, generator_backend):
        clip = raw_splits[1].frames[0]
        request = GenerationRequest(condition=CONDITION, motion_tokens=tokenizer.frames_to_tokens(clip, 16))
        out = reconstruct_video(request, generator_backend, tokenizer, 16, (32, 32), sample_id=7)
        assert out.sample_id == 7
        assert out.frames.shape == clip.shape
        np.testing.assert_allclose(out.frames, clip, atol=1e-5)

    def test_each_frame_depends_only_on_its_own_tokens(self, raw_splits, tokenizer, generator_backend, rng):
        tokens = tokenizer.frames_to_tokens(raw_splits[1].frames[2], 16)
        perm = rng.permutation(len(tokens))

        def run(motion):
            request = GenerationRequest(condition=CONDITION, motion_tokens=motion)
            return reconstruct_video(request, generator_backend, tokenizer, 16, (32, 32)).frames

        np.testing.assert_allclose(run(tokens[perm]), run(tokens)[perm], atol=1e-6)

    def test_backend_failure_names_the_frame(self, tokenizer):
        request = GenerationRequest(condition=CONDITION, motion_tokens=np.zeros((4, 4, 768), dtype=np.float32))
        with pytest.raises(GenerationError) as info:
            reconstruct_video(request, _BrokenGenerator(), tokenizer, 16, (32, 32))
        assert info.value.frame_index == 2
        assert "broken" in str(info.value)

    def test_wrong_frame_shape_is_rejected(self, tokenizer):
        request = GenerationRequest(condition=CONDITION, motion_tokens=np.zeros((2, 4, 768), dtype=np.float32))
        with pytest.raises(GenerationError, match="forma"):
            reconstruct_video(request, _WrongShapeGenerator(), tokenizer, 16, (32, 32))

    def test_request_validation(self):
        with pytest.raises(GenerationError):
            GenerationRequest(condition=CONDITION, motion_tokens=np.zeros((0, 4, 768)))
        with pytest.raises(GenerationError, match="inversion_steps"):
            GenerationRequest(condition=CONDITION, motion_tokens=np.zeros((2, 4, 768)),
                              smoothing_steps=10, inversion_steps=20)

    def test_toy_generator_output_is_clipped(self, tokenizer):
        latents = tokenizer.encode(np.full((1, 3, 16, 16), 2.0, dtype=np.float32))
        frame = ToyFrameGenerator().generate(latents, CONDITION, 0, tokenizer)
        assert frame.max() == 1.0


class TestInflation:
    def test_context_is_first_and_previous_frame(self, rng):
        z = [rng.standard_normal((3, 4)) for _ in range(5)]
        query, context = inflate_attention_kv(z, 3)
        np.testing.assert_array_equal(query, z[3])
        np.testing.assert_array_equal(context, np.concatenate([z[0], z[2]]))

    def test_first_frame_attends_to_itself_twice(self, rng):
        z = [rng.standard_normal((3, 4)) for _ in range(2)]
        _, context = inflate_attention_kv(z, 0)
        np.testing.assert_array_equal(context, np.concatenate([z[0], z[0]]))

    def test_attention_weights_over_the_inflated_context(self, rng):
        z = [rng.standard_normal((2, 4)) for _ in range(3)]
        query, context = inflate_attention_kv(z, 2)
        scores = query @ context.T / 2.0
        weights = np.exp(scores - scores.max(axis=1, keepdims=True))
        weights /= weights.sum(axis=1, keepdims=True)
        np.testing.assert_allclose(inflated_attention(z, 2), weights @ context, atol=1e-10)

    def test_out_of_range_frame(self, rng):
        with pytest.raises(GenerationError):
            inflate_attention_kv([rng.standard_normal((2, 2))], 1)
        with pytest.raises(GenerationError):
            inflate_attention_kv([], 0)


class TestSubstitutions:
    def test_valid_items(self):
        assert parse_substitutions(["semantic=noise", "motion=mlp"]) == {"semantic": "noise", "motion": "mlp"}
        assert parse_substitutions(None) == {}

    @pytest.mark.parametrize("item", ["semantic=mlp", "colour=noise", "structure"])
    def test_invalid_items(self, item):
        with pytest.raises(ConfigError):
            parse_substitutions([item])


class TestReconstructDataset:
    def test_full_chain_shapes(self, prepared_splits, trained_states, tokenizer, generator_backend, tiny_config):
        test = prepared_splits[1]
        recon = reconstruct_dataset(test, trained_states, tokenizer, generator_backend, tiny_config)
        assert recon.frames.shape == test.frames.shape
        assert recon.tokens.shape == (len(test), 8, 4, 768)
        assert recon.sample_ids == list(range(len(test)))
        assert recon.frames.min() >= 0.0 and recon.frames.max() <= 1.0

    def test_substitutions_change_only_what_they_replace(self, prepared_splits, trained_states, tokenizer,
                                                         generator_backend, tiny_config):
        test = prepared_splits[1]
        base = reconstruct_dataset(test, trained_states, tokenizer, generator_backend, tiny_config)
        motion = reconstruct_dataset(test, trained_states, tokenizer, generator_backend, tiny_config,
                                     {"motion": "noise"})
        np.testing.assert_allclose(motion.tokens[:, 0], base.tokens[:, 0])
        assert not np.allclose(motion.tokens[:, 1:], base.tokens[:, 1:])

        structure = reconstruct_dataset(test, trained_states, tokenizer, generator_backend, tiny_config,
                                        {"structure": "noise"})
        assert not np.allclose(structure.tokens[:, 0], base.tokens[:, 0])

        mlp = reconstruct_dataset(test, trained_states, tokenizer, generator_backend, tiny_config, {"motion": "mlp"})
        np.testing.assert_allclose(mlp.tokens[:, 0], base.tokens[:, 0])
        assert mlp.substitutions == {"motion": "mlp"}

    def test_mlp_substitution_needs_the_baseline(self, prepared_splits, trained_states, tokenizer,
                                                 generator_backend, tiny_config):
        states = {key: value for key, value in trained_states.items() if key != "perframe"}
        with pytest.raises(GenerationError, match="baseline"):
            reconstruct_dataset(prepared_splits[1], states, tokenizer, generator_backend, tiny_config,
                                {"motion": "mlp"})


class TestStorage:
    def test_frames_and_pngs_agree(self, raw_splits, tokenizer, generator_backend, tiny_config, tmp_path):
        test = raw_splits[1]
        recon = ground_truth_reconstructions(test, tokenizer, generator_backend, 16, tiny_config)
        write_reconstructions(tmp_path, recon, {"tag": "ground_truth"})

        loaded = read_reconstructions(tmp_path)
        assert loaded.sample_ids == recon.sample_ids
        assert loaded.substitutions == {"features": "ground_truth"}
        assert loaded.meta["tag"] == "ground_truth"
        np.testing.assert_allclose(loaded.frames, recon.frames, atol=1.0 / 255)
        png = read_frame_png(tmp_path / "sample_0002" / "frame_05.png")
        np.testing.assert_array_equal(png, loaded.frames[2, 5])
        assert sample_manifest(tmp_path, 2)["frames"][0] == "frame_00.png"

    def test_directory_of_another_kind_is_rejected(self, tmp_path):
        write_arrays(tmp_path, {"x": np.zeros(2, dtype=np.float32)}, {"kind": "importance"})
        with pytest.raises(GenerationError):
            read_reconstructions(tmp_path)
