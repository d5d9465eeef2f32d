"""
Reporte de métricas: registros por muestra + agregados bootstrap.

    report.json      registros completos, agregados y parámetros
    per_sample.csv   una fila por muestra
    aggregates.csv   media y CI por métrica
    metrics.xlsx     (opcional) ambas tablas, una hoja cada una
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from Functions.DataImport import write_tables_to_excel
from Functions.DataIO.array_store import read_json, write_json
from Functions.DataIO.dataset import VideoDataset
from Functions.errors import MetricError
from Functions.Training import FLOAT_FORMAT, progress
from .classification import nway_top1
from .metrics import clip_pcc, epe, hue_pcc, psnr_clip, ssim_clip, vifi_score
from .retrieval import bootstrap_aggregate

logger = logging.getLogger(__name__)

METRICS = ("two_way_I", "two_way_V", "vifi", "ssim", "psnr", "hue_pcc", "clip_pcc", "epe")


@dataclass
class MetricReport:
    records: List[Dict[str, float]]
    aggregates: Dict[str, Dict[str, float]]
    gate: float
    n_boot: int
    params: Dict[str, Any] = field(default_factory=dict)

    def records_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.records, columns=["sample_id", *METRICS])

    def aggregates_frame(self) -> pd.DataFrame:
        rows = [{"metric": metric, **self.aggregates[metric]} for metric in METRICS]
        return pd.DataFrame(rows, columns=["metric", "mean", "ci_low", "ci_high", "n_boot", "n_samples"])

    def to_dict(self) -> Dict[str, Any]:
        return {"records": self.records, "aggregates": self.aggregates, "gate": self.gate,
                "n_boot": self.n_boot, "params": self.params}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MetricReport":
        return cls(records=list(data["records"]), aggregates=dict(data["aggregates"]), gate=float(data["gate"]),
                   n_boot=int(data["n_boot"]), params=dict(data.get("params", {})))

    def mean(self, metric: str) -> float:
        return self.aggregates[metric]["mean"]


def aggregate_records(records: List[Dict[str, float]], n_boot: int, seed: int) -> Dict[str, Dict[str, float]]:
    """Agregados bootstrap por métrica (recalculables desde los registros)."""
    if not records:
        raise MetricError("No hay registros para agregar")
    return {metric: bootstrap_aggregate([r[metric] for r in records], n_boot, [seed, index]).to_dict()
            for index, metric in enumerate(METRICS)}


def evaluate_clip(gt: np.ndarray, pred: np.ndarray, embedder, classifier, flow_backend, config,
                  sample_id: int, seed: int) -> Dict[str, float]:
    """Las ocho métricas de un par de clips."""
    vifi = vifi_score(gt, pred, embedder)
    return {
        "sample_id": int(sample_id),
        "two_way_I": nway_top1(gt, pred, config.nway_n, config.nway_trials, "image", classifier, [seed, sample_id, 0]),
        "two_way_V": nway_top1(gt, pred, config.nway_n, config.nway_trials, "video", classifier, [seed, sample_id, 1]),
        "vifi": vifi,
        "ssim": ssim_clip(gt, pred),
        "psnr": psnr_clip(gt, pred),
        "hue_pcc": hue_pcc(gt, pred),
        "clip_pcc": clip_pcc(pred, vifi, embedder, config.clip_gate),
        "epe": epe(gt, pred, flow_backend),
    }


def evaluate_reconstructions(dataset: VideoDataset, recon_frames: np.ndarray, sample_ids: List[int],
                             embedder, classifier, flow_backend, config,
                             seed: Optional[int] = None) -> MetricReport:
    """
    Evalúa las reconstrucciones contra los clips del split.

    Args:
        dataset: Split con los clips verdaderos
        recon_frames: N×f×3×H×W reconstruidos
        sample_ids: Índice en el split de cada reconstrucción
        embedder, classifier, flow_backend: Backends de evaluación
        config: RunConfig (nway_n, nway_trials, clip_gate, n_boot)
        seed: Semilla maestra (por defecto config.seed)

    Returns:
        MetricReport
    """
    seed = config.seed if seed is None else seed
    if len(recon_frames) != len(sample_ids):
        raise MetricError(f"{len(recon_frames)} reconstrucciones para {len(sample_ids)} ids")
    records = [
        evaluate_clip(dataset.frames[sample_id], recon_frames[position], embedder, classifier, flow_backend,
                      config, sample_id, seed)
        for position, sample_id in progress(list(enumerate(sample_ids)), "evaluate", len(sample_ids))
    ]
    report = MetricReport(
        records=records, aggregates=aggregate_records(records, config.n_boot, seed), gate=config.clip_gate,
        n_boot=config.n_boot, params={"nway_n": config.nway_n, "nway_trials": config.nway_trials, "seed": seed},
    )
    logger.info("📊 %d muestras evaluadas: SSIM %.3f, EPE %.3f, 2-way-V %.3f", len(records),
                report.mean("ssim"), report.mean("epe"), report.mean("two_way_V"))
    return report


def write_report(report: MetricReport, directory: Union[str, Path], xlsx: bool = False) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / "report.json", report.to_dict())
    report.records_frame().to_csv(directory / "per_sample.csv", index=False, float_format=FLOAT_FORMAT)
    report.aggregates_frame().to_csv(directory / "aggregates.csv", index=False, float_format=FLOAT_FORMAT)
    if xlsx:
        write_tables_to_excel({"per_sample": report.records_frame(), "aggregates": report.aggregates_frame()},
                              directory / "metrics.xlsx")
    logger.info("💾 Reporte de métricas guardado en %s", directory)
    return directory / "report.json"


def read_report(directory: Union[str, Path]) -> MetricReport:
    return MetricReport.from_dict(read_json(Path(directory) / "report.json"))
