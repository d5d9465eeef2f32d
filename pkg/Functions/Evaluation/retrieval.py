"""
Recuperación fMRI -> video y agregación bootstrap.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Union

import numpy as np

from Functions.errors import MetricError

logger = logging.getLogger(__name__)


def retrieval_ranks(query_embeddings: np.ndarray, candidates: np.ndarray,
                    true_indices: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Rango (0 = primero) del candidato verdadero de cada consulta por similitud coseno.
    El rango es la cantidad de otros candidatos con similitud mayor o igual:
    los empates cuentan en contra del verdadero.
    """
    queries = np.asarray(query_embeddings, dtype=np.float64)
    candidates = np.asarray(candidates, dtype=np.float64)
    if queries.ndim != 2 or candidates.ndim != 2 or queries.shape[1] != candidates.shape[1]:
        raise MetricError(f"retrieval: formas incompatibles {queries.shape} y {candidates.shape}")
    truth = np.arange(len(queries)) if true_indices is None else np.asarray(true_indices, dtype=np.int64)
    if len(truth) != len(queries) or truth.min(initial=0) < 0 or truth.max(initial=0) >= len(candidates):
        raise MetricError("retrieval: cada consulta necesita su candidato verdadero entre los candidatos")

    queries = queries / np.linalg.norm(queries, axis=1, keepdims=True)
    candidates = candidates / np.linalg.norm(candidates, axis=1, keepdims=True)
    similarity = queries @ candidates.T
    true_similarity = similarity[np.arange(len(queries)), truth]
    return (similarity >= true_similarity[:, None]).sum(axis=1) - 1


def retrieval(query_embeddings: np.ndarray, candidates: np.ndarray,
              k_list: Sequence[int] = (10, 100),
              true_indices: Optional[np.ndarray] = None) -> Dict[int, float]:
    """
    Top-k de recuperación por similitud coseno.

    Args:
        query_embeddings: N×d (embeddings decodificados del fMRI)
        candidates: M×d (embeddings de video)
        k_list: Valores de k; se recortan a M
        true_indices: Candidato verdadero de cada consulta (por defecto 0..N−1)

    Returns:
        {k: fracción de consultas con el verdadero entre los k más similares}
    """
    ranks = retrieval_ranks(query_embeddings, candidates, true_indices)
    n_candidates = len(candidates)
    return {int(k): float(np.mean(ranks < min(int(k), n_candidates))) for k in k_list}


@dataclass(frozen=True)
class BootstrapResult:
    mean: float
    ci_low: float
    ci_high: float
    n_boot: int
    n_samples: int

    def to_dict(self) -> Dict[str, Union[float, int]]:
        return asdict(self)


def bootstrap_aggregate(values: Sequence[float], n_boot: int = 100,
                        seed: Union[int, Sequence[int]] = 0) -> BootstrapResult:
    """Media y CI 2.5/97.5 percentil de n_boot remuestreos con reemplazo."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise MetricError("bootstrap_aggregate requiere al menos una muestra")
    if n_boot < 1:
        raise MetricError(f"n_boot={n_boot} debe ser positivo")
    rng = np.random.default_rng(seed)
    resamples = values[rng.integers(0, values.size, size=(n_boot, values.size))].mean(axis=1)
    low, high = np.percentile(resamples, [2.5, 97.5])
    return BootstrapResult(mean=float(values.mean()), ci_low=float(low), ci_high=float(high),
                           n_boot=n_boot, n_samples=int(values.size))
