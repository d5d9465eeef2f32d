"""
Módulo DataIO: contrato de directorio del dataset, preprocesamiento,
regla de captions y generador sintético.
"""

from .array_store import read_arrays, read_json, write_arrays, write_json
from .captions import CAPTION_JOINER, caption_similarities, pair_captions
from .dataset import (
    DatasetManifest,
    FmriRecord,
    VideoClip,
    VideoDataset,
    frames_from_u8,
    frames_to_u8,
    read_dataset,
    write_dataset,
)
from .prepare import Preparation, prepare_dataset, read_prepared, write_prepared
from .preprocessing import (
    VoxelSelection,
    apply_hemodynamic_lag,
    apply_zscore,
    fit_zscore,
    pair_stimuli_with_bold,
    segment_and_downsample,
    select_voxels,
)
from .synthetic import (
    DESCRIPTOR_SIZE,
    SyntheticConfig,
    generate_synthetic_dataset,
    render_shape,
    shape_descriptor,
    true_weights,
)

__all__ = [
    'read_arrays',
    'read_json',
    'write_arrays',
    'write_json',
    'CAPTION_JOINER',
    'caption_similarities',
    'pair_captions',
    'DatasetManifest',
    'FmriRecord',
    'VideoClip',
    'VideoDataset',
    'frames_from_u8',
    'frames_to_u8',
    'read_dataset',
    'write_dataset',
    'Preparation',
    'prepare_dataset',
    'read_prepared',
    'write_prepared',
    'VoxelSelection',
    'apply_hemodynamic_lag',
    'apply_zscore',
    'fit_zscore',
    'pair_stimuli_with_bold',
    'segment_and_downsample',
    'select_voxels',
    'DESCRIPTOR_SIZE',
    'SyntheticConfig',
    'generate_synthetic_dataset',
    'render_shape',
    'shape_descriptor',
    'true_weights',
]
