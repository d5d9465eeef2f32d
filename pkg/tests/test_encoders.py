import numpy as np
import pytest

from Functions.Encoders import (
    CONDITION_SHAPE,
    EMBED_DIM,
    get_backend,
    register_backend,
    registered_names,
    token_width,
    tokens_per_frame,
)
from Functions.errors import EncoderError


def test_embeddings_are_unit_and_deterministic(embedder, raw_splits):
    clip = raw_splits[0].frames[0]
    first = embedder.embed_video(clip)
    again = get_backend("embedder", "toy").embed_video(clip)
    assert first.shape == (EMBED_DIM,)
    assert np.linalg.norm(first) == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(first, again)
    assert np.linalg.norm(embedder.embed_text("a small red circle")) == pytest.approx(1.0, abs=1e-6)


def test_caption_is_closer_to_its_own_clip(embedder, raw_splits):
    train = raw_splits[0]
    own = [float(embedder.embed_text(train.captions[i]) @ embedder.embed_video(train.frames[i]))
           for i in range(len(train))]
    shuffled = [float(embedder.embed_text(train.captions[i]) @ embedder.embed_video(train.frames[i - 1]))
                for i in range(len(train))]
    assert np.mean(own) > np.mean(shuffled)


def test_matched_pairs_sit_together_across_the_dataset(embedder, raw_splits):
    captions = [caption for split in raw_splits for caption in split.captions]
    frames = np.concatenate([split.frames for split in raw_splits])
    sims = embedder.embed_texts(captions) @ embedder.embed_videos(frames).T
    matched = np.diag(sims)
    unmatched = sims[~np.eye(len(sims), dtype=bool)]
    assert matched.mean() >= 0.99
    assert matched.min() >= 0.9
    assert abs(unmatched.mean()) < 0.1


def test_empty_text_is_rejected(embedder):
    with pytest.raises(EncoderError):
        embedder.embed_text("   ")


def test_condition_shape(conditioner):
    assert conditioner.condition("a red square").shape == CONDITION_SHAPE
    assert conditioner.condition_batch(["a", "b"]).shape == (2, *CONDITION_SHAPE)


def test_tokenizer_inverts_exactly(tokenizer, rng):
    frames = rng.random((2, 3, 32, 32)).astype(np.float32)
    latents = tokenizer.encode(frames)
    assert latents.shape == (2, 3, 4, 4, 64)
    np.testing.assert_allclose(tokenizer.decode(latents), frames, atol=1e-5)

    tokens = tokenizer.frames_to_tokens(frames, 16)
    assert tokens.shape == (2, tokens_per_frame((32, 32), 16), token_width(16))
    np.testing.assert_allclose(tokenizer.tokens_to_frames(tokens, 16, (32, 32)), frames, atol=1e-5)


def test_tokenizer_is_linear(tokenizer, rng):
    x, y = rng.random((2, 3, 32, 32))
    mixed = tokenizer.encode(0.3 * x - 1.7 * y)
    np.testing.assert_allclose(mixed, 0.3 * tokenizer.encode(x) - 1.7 * tokenizer.encode(y), atol=1e-4)


def test_tokenizer_rejects_bad_geometry(tokenizer, rng):
    with pytest.raises(EncoderError):
        tokenizer.encode(rng.random((3, 30, 32)))
    with pytest.raises(EncoderError):
        tokenizer.frames_to_tokens(rng.random((3, 32, 32)), 12)


def test_registry_lookup_and_plugins():
    assert "toy" in registered_names("flow")
    with pytest.raises(EncoderError, match="no registrado"):
        get_backend("embedder", "clip-vit-b32")
    with pytest.raises(EncoderError, match="desconocido"):
        registered_names("vocoder")

    register_backend("embedder", "toy-copy", "Functions.Encoders.toy_backends:ToyEmbedder")
    backend = get_backend("embedder", "toy-copy")
    assert backend.name == "toy-copy"
    with pytest.raises(EncoderError):
        register_backend("embedder", "broken", "no_colon_here")
