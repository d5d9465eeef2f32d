"""
Módulo Generator: característica -> video con un backend de generación
intercambiable y la regla de inflado de atención.
"""

from .VideoGenerator import (
    SUBSTITUTIONS,
    GenerationRequest,
    Reconstructions,
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

__all__ = [
    'SUBSTITUTIONS',
    'GenerationRequest',
    'Reconstructions',
    'ToyFrameGenerator',
    'ground_truth_reconstructions',
    'inflate_attention_kv',
    'inflated_attention',
    'parse_substitutions',
    'read_frame_png',
    'read_reconstructions',
    'reconstruct_dataset',
    'reconstruct_video',
    'sample_manifest',
    'write_reconstructions',
]
