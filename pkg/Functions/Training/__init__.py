"""
Módulo Training: utilidades de entrenamiento compartidas y persistencia de estados.
"""

from .loop import (
    FLOAT_FORMAT,
    LossGuard,
    LossHistory,
    iterate_batches,
    mean_loss,
    progress,
    seeded_generator,
    split_train_val,
    warmup_schedule,
)
from .state_io import load_arrays_for, load_module_arrays, save_module

__all__ = [
    'FLOAT_FORMAT',
    'LossGuard',
    'LossHistory',
    'iterate_batches',
    'mean_loss',
    'progress',
    'seeded_generator',
    'split_train_val',
    'warmup_schedule',
    'load_arrays_for',
    'load_module_arrays',
    'save_module',
]
