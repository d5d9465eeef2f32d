"""
Módulo SemanticDecoder: fMRI -> espacio de embedding compartido y condición
de texto del generador (entrenamiento contrastivo tri-modal).
"""

from .augmentation import (
    AugmentationPolicy,
    augment_text,
    augment_voxels,
    augmented_frame,
    load_synonyms,
    random_crop_resize,
)
from .decoder import (
    SemanticDecoder,
    SemanticDecoderState,
    decode_semantic,
    load_semantic,
    save_semantic,
    train_semantic,
)
from .losses import bi_infonce, combined_loss, combined_loss_terms, semantic_loss

__all__ = [
    'AugmentationPolicy',
    'augment_text',
    'augment_voxels',
    'augmented_frame',
    'load_synonyms',
    'random_crop_resize',
    'SemanticDecoder',
    'SemanticDecoderState',
    'decode_semantic',
    'load_semantic',
    'save_semantic',
    'train_semantic',
    'bi_infonce',
    'combined_loss',
    'combined_loss_terms',
    'semantic_loss',
]
