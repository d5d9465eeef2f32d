"""
Módulo StructureDecoder: fMRI -> latente del primer frame.
"""

from .decoder import (
    StructureDecoder,
    StructureDecoderState,
    decode_structure,
    first_frame_latents,
    load_structure,
    save_structure,
    structure_loss,
    train_structure,
)

__all__ = [
    'StructureDecoder',
    'StructureDecoderState',
    'decode_structure',
    'first_frame_latents',
    'load_structure',
    'save_structure',
    'structure_loss',
    'train_structure',
]
