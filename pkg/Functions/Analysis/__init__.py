"""
Módulo Analysis: test de orden de frames, ablaciones del generador de
movimiento y mapas de importancia por voxel / ROI.
"""

from .ablation import (
    AblationResult,
    cmg_epe,
    cmg_motion_ablation,
    guidance_ablation,
    perframe_epe,
    variant_ablation,
)
from .importance import (
    ImportanceMap,
    importance_auc,
    linear_layers,
    normalize_min_max,
    read_importance,
    read_roi_labels,
    roi_importance,
    roi_importance_table,
    voxel_importance,
    write_importance,
)
from .shuffle import SHUFFLE_METRICS, ShuffleTestResult, shuffle_test

__all__ = [
    'AblationResult',
    'cmg_epe',
    'cmg_motion_ablation',
    'guidance_ablation',
    'perframe_epe',
    'variant_ablation',
    'ImportanceMap',
    'importance_auc',
    'linear_layers',
    'normalize_min_max',
    'read_importance',
    'read_roi_labels',
    'roi_importance',
    'roi_importance_table',
    'voxel_importance',
    'write_importance',
    'SHUFFLE_METRICS',
    'ShuffleTestResult',
    'shuffle_test',
]
