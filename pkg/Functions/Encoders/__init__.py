"""
Módulo Encoders: backends intercambiables de embedding, tokenización y
condición de texto, con defaults toy deterministas.
"""

from .interfaces import (
    CONDITION_SHAPE,
    EMBED_DIM,
    ClassifierBackend,
    EmbeddingBackend,
    FlowBackend,
    FrameGeneratorBackend,
    FrameTokenizer,
    TextConditioner,
)
from .registry import get_backend, register_backend, registered_names
from .toy_backends import (
    DESCRIPTOR_DIM,
    ToyConditioner,
    ToyEmbedder,
    ToyTokenizer,
    estimate_attributes,
    frame_features,
    image_descriptor,
    seed_from_name,
    text_descriptor,
    token_width,
    tokens_per_frame,
)

__all__ = [
    'CONDITION_SHAPE',
    'EMBED_DIM',
    'ClassifierBackend',
    'EmbeddingBackend',
    'FlowBackend',
    'FrameGeneratorBackend',
    'FrameTokenizer',
    'TextConditioner',
    'get_backend',
    'register_backend',
    'registered_names',
    'DESCRIPTOR_DIM',
    'ToyConditioner',
    'ToyEmbedder',
    'ToyTokenizer',
    'estimate_attributes',
    'frame_features',
    'image_descriptor',
    'seed_from_name',
    'text_descriptor',
    'token_width',
    'tokens_per_frame',
]
