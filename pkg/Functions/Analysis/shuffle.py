"""
Test de orden de frames: ¿el orden reconstruido supera a sus permutaciones?

Para cada muestra que pasa el gate (vifi > gate) se permutan los frames
reconstruidos n_shuffles veces; δᵢ = 1 si la permutación i supera al orden
original en la métrica (clip_pcc mayor, epe menor; un empate no cuenta) y
P = Σδᵢ / n_shuffles. El test se repite `repeats` veces con semillas derivadas.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from Functions.errors import AnalysisError
from Functions.Evaluation.metrics import cosine, vifi_score
from Functions.Training import progress

logger = logging.getLogger(__name__)

SHUFFLE_METRICS = ("clip_pcc", "epe")


@dataclass
class ShuffleTestResult:
    metric: str
    n_shuffles: int
    repeats: int
    gate: float
    tested_ids: List[int]
    skipped_ids: List[int]
    p_values: np.ndarray                        # repeats × muestras testeadas
    gating_rule: str = "vifi > gate"
    seed: int = 0
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def p_mean(self) -> np.ndarray:
        return self.p_values.mean(axis=0) if self.p_values.size else np.zeros(0)

    @property
    def p_std(self) -> np.ndarray:
        return self.p_values.std(axis=0) if self.p_values.size else np.zeros(0)

    def overall_mean(self) -> float:
        return float(self.p_values.mean()) if self.p_values.size else float("nan")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "metric": self.metric, "n_shuffles": self.n_shuffles, "repeats": self.repeats, "gate": self.gate,
            "gating_rule": self.gating_rule, "seed": self.seed,
            "tested_ids": list(self.tested_ids), "skipped_ids": list(self.skipped_ids),
            "p_values": self.p_values.tolist(), "p_mean": self.p_mean.tolist(), "p_std": self.p_std.tolist(),
            "overall_mean": self.overall_mean() if self.p_values.size else None,
            **self.extra,
        }


class _OrderScorer:
    """Puntúa órdenes de frames de un clip reutilizando embeddings y flujos ya calculados."""

    def __init__(self, gt: np.ndarray, recon: np.ndarray, metric: str, embedder, flow_backend):
        self.metric = metric
        self.recon = recon
        self.flow_backend = flow_backend
        self._flows: Dict[Tuple[int, int], np.ndarray] = {}
        if metric == "clip_pcc":
            self._embeddings = [embedder.embed_image(frame) for frame in recon]
        else:
            self._gt_flows = [flow_backend.flow(gt[i], gt[i + 1]) for i in range(len(gt) - 1)]

    def _flow(self, a: int, b: int) -> np.ndarray:
        if (a, b) not in self._flows:
            self._flows[(a, b)] = self.flow_backend.flow(self.recon[a], self.recon[b])
        return self._flows[(a, b)]

    def score(self, order: np.ndarray) -> float:
        pairs = list(zip(order[:-1], order[1:]))
        if self.metric == "clip_pcc":
            return float(np.mean([cosine(self._embeddings[a], self._embeddings[b]) for a, b in pairs]))
        errors = [np.sqrt(((gt_flow - self._flow(a, b)) ** 2).sum(axis=0)).mean()
                  for gt_flow, (a, b) in zip(self._gt_flows, pairs)]
        return float(np.mean(errors))

    def outperforms(self, shuffled: float, original: float) -> bool:
        return shuffled > original if self.metric == "clip_pcc" else shuffled < original


def shuffle_test(recon_clips: np.ndarray, gt_clips: np.ndarray, metric: str, embedder, flow_backend,
                 n_shuffles: int = 100, gate: float = 0.6, seed: int = 0, repeats: int = 5,
                 sample_ids: Optional[Sequence[int]] = None,
                 vifi_values: Optional[Sequence[float]] = None) -> ShuffleTestResult:
    """
    P-value del orden de frames por muestra.

    Args:
        recon_clips: N×f×3×H×W reconstruidos
        gt_clips: N×f×3×H×W verdaderos
        metric: 'clip_pcc' o 'epe'
        embedder: EmbeddingBackend (gate y clip_pcc)
        flow_backend: FlowBackend (epe)
        n_shuffles: Permutaciones por repetición
        gate: Umbral de vifi para testear la muestra
        seed: Semilla maestra; la repetición r usa [seed, r]
        repeats: Repeticiones del test
        sample_ids: Ids de las muestras (por defecto 0..N−1)
        vifi_values: vifi ya calculado por muestra (se calcula si falta)

    Returns:
        ShuffleTestResult
    """
    if metric not in SHUFFLE_METRICS:
        raise AnalysisError(f"metric={metric!r} debe ser una de {SHUFFLE_METRICS}")
    recon_clips = np.asarray(recon_clips, dtype=np.float32)
    gt_clips = np.asarray(gt_clips, dtype=np.float32)
    if recon_clips.shape != gt_clips.shape or recon_clips.ndim != 5:
        raise AnalysisError(f"clips con formas {recon_clips.shape} y {gt_clips.shape}; se esperaba N×f×3×H×W")
    if recon_clips.shape[1] < 2:
        raise AnalysisError(f"el test de orden requiere al menos 2 frames, hay {recon_clips.shape[1]}")
    if n_shuffles < 1 or repeats < 1:
        raise AnalysisError(f"n_shuffles={n_shuffles} y repeats={repeats} deben ser positivos")

    ids = list(range(len(recon_clips))) if sample_ids is None else [int(i) for i in sample_ids]
    if vifi_values is None:
        vifi_values = [vifi_score(gt, recon, embedder) for gt, recon in zip(gt_clips, recon_clips)]
    tested = [position for position, value in enumerate(vifi_values) if value > gate]
    skipped = [ids[position] for position in range(len(ids)) if position not in tested]
    if skipped:
        logger.info("⚠️ %d muestras no pasan el gate vifi > %.2f y no se testean", len(skipped), gate)

    n_frames = recon_clips.shape[1]
    scorers = {position: _OrderScorer(gt_clips[position], recon_clips[position], metric, embedder, flow_backend)
               for position in tested}
    originals = {position: scorer.score(np.arange(n_frames)) for position, scorer in scorers.items()}
    p_values = np.zeros((repeats, len(tested)))
    for repeat in progress(range(repeats), f"shuffle {metric}", repeats):
        rng = np.random.default_rng([seed, repeat])
        for column, position in enumerate(tested):
            scorer = scorers[position]
            wins = sum(scorer.outperforms(scorer.score(rng.permutation(n_frames)), originals[position])
                       for _ in range(n_shuffles))
            p_values[repeat, column] = wins / n_shuffles

    result = ShuffleTestResult(metric=metric, n_shuffles=n_shuffles, repeats=repeats, gate=gate,
                               tested_ids=[ids[p] for p in tested], skipped_ids=skipped,
                               p_values=p_values, seed=seed)
    logger.info("📊 Shuffle test %s: %d muestras, P medio %.3f", metric, len(tested), result.overall_mean())
    return result
