"""
Módulo Evaluation: las ocho métricas, el test n-way top-1, recuperación,
bootstrap y el reporte de métricas.
"""

from .classification import ToyClassifier, nway_top1
from .flow import BlockMatchingFlow
from .metrics import (
    PSNR_CAP,
    centroid_trajectory,
    clip_pcc,
    cosine,
    epe,
    hue_histogram,
    hue_pcc,
    psnr,
    psnr_clip,
    ssim,
    ssim_clip,
    velocity_sign_agreement,
    vifi_score,
)
from .report import (
    METRICS,
    MetricReport,
    aggregate_records,
    evaluate_clip,
    evaluate_reconstructions,
    read_report,
    write_report,
)
from .retrieval import BootstrapResult, bootstrap_aggregate, retrieval, retrieval_ranks

__all__ = [
    'ToyClassifier',
    'nway_top1',
    'BlockMatchingFlow',
    'PSNR_CAP',
    'centroid_trajectory',
    'clip_pcc',
    'cosine',
    'epe',
    'hue_histogram',
    'hue_pcc',
    'psnr',
    'psnr_clip',
    'ssim',
    'ssim_clip',
    'velocity_sign_agreement',
    'vifi_score',
    'METRICS',
    'MetricReport',
    'aggregate_records',
    'evaluate_clip',
    'evaluate_reconstructions',
    'read_report',
    'write_report',
    'BootstrapResult',
    'bootstrap_aggregate',
    'retrieval',
    'retrieval_ranks',
]
