"""
Módulo MotionGenerator: máscara causal dispersa, Consistency Motion Generator
y baseline de MLPs por frame.
"""

from .cmg import (
    CmgConfig,
    CmgState,
    ConsistencyMotionGenerator,
    clip_tokens,
    cmg_forward,
    consistency_loss,
    generate_motion,
    load_cmg,
    rollout_from_tokens,
    save_cmg,
    train_cmg,
)
from .layers import VARIANTS, AdaLN, Attention, CmgBlock, sinusoidal_encoding
from .masks import SparseCausalMask, build_mask, causal_frame_mask, same_frame_mask
from .perframe import (
    PerFrameMlp,
    PerFrameMlpState,
    load_perframe,
    predict_perframe,
    save_perframe,
    train_perframe,
)

__all__ = [
    'CmgConfig',
    'CmgState',
    'ConsistencyMotionGenerator',
    'clip_tokens',
    'cmg_forward',
    'consistency_loss',
    'generate_motion',
    'load_cmg',
    'rollout_from_tokens',
    'save_cmg',
    'train_cmg',
    'VARIANTS',
    'AdaLN',
    'Attention',
    'CmgBlock',
    'sinusoidal_encoding',
    'SparseCausalMask',
    'build_mask',
    'causal_frame_mask',
    'same_frame_mask',
    'PerFrameMlp',
    'PerFrameMlpState',
    'load_perframe',
    'predict_perframe',
    'save_perframe',
    'train_perframe',
]
