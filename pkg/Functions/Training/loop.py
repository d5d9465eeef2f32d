"""
Utilidades compartidas por los entrenamientos (semántico, estructural, CMG,
baseline por frame): semillas, batches, warmup, guardas de pérdida e
historial de pérdidas.
"""

import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
import torch
from torch.optim.lr_scheduler import LambdaLR
from tqdm import tqdm

from Functions.errors import TrainingError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.8g"


def seeded_generator(seed: int) -> torch.Generator:
    """Fija la semilla global de torch y devuelve un Generator propio."""
    torch.manual_seed(seed)
    generator = torch.Generator()
    generator.manual_seed(seed)
    return generator


def split_train_val(n_samples: int, val_fraction: float) -> Tuple[np.ndarray, np.ndarray]:
    """Validación = último val_fraction de las muestras (al menos 1 si n >= 2)."""
    n_val = int(round(n_samples * val_fraction))
    if val_fraction > 0 and n_samples >= 2:
        n_val = max(1, n_val)
    n_val = min(n_val, n_samples - 1)
    indices = np.arange(n_samples)
    return indices[:n_samples - n_val], indices[n_samples - n_val:]


def iterate_batches(indices: np.ndarray, batch_size: int,
                    generator: Optional[torch.Generator] = None) -> Iterator[np.ndarray]:
    """Recorre los índices en batches; con generator se barajan."""
    indices = np.asarray(indices)
    if generator is not None:
        order = torch.randperm(len(indices), generator=generator).numpy()
        indices = indices[order]
    for start in range(0, len(indices), batch_size):
        yield indices[start:start + batch_size]


def warmup_schedule(optimizer: torch.optim.Optimizer, warmup_steps: int) -> LambdaLR:
    """lr(step) = base · min(1, step / warmup_steps); sin warmup, constante."""
    if warmup_steps <= 0:
        return LambdaLR(optimizer, lambda step: 1.0)
    return LambdaLR(optimizer, lambda step: min(1.0, step / warmup_steps))


def progress(iterable: Iterable, desc: str, total: Optional[int] = None) -> Iterable:
    """Barra tqdm, desactivada si el logging está por encima de INFO."""
    return tqdm(iterable, desc=desc, total=total, leave=False,
                disable=not logger.isEnabledFor(logging.INFO))


class LossGuard:
    """
    Aborta el entrenamiento ante pérdidas no finitas o divergencia.

    Args:
        stage: Nombre de la etapa (para el diagnóstico)
        divergence_factor: Si se indica, pérdida > factor × pérdida inicial aborta
    """

    def __init__(self, stage: str, divergence_factor: Optional[float] = None):
        self.stage = stage
        self.divergence_factor = divergence_factor
        self.initial_loss: Optional[float] = None
        self.last_finite: Optional[float] = None

    def check(self, loss: float, epoch: int, step: int) -> None:
        if not math.isfinite(loss):
            logger.error("❌ %s: pérdida no finita en época %d, paso %d", self.stage, epoch, step)
            raise TrainingError(f"{self.stage}: pérdida no finita ({loss})", epoch, step, self.last_finite)
        if self.initial_loss is None:
            self.initial_loss = loss
        elif (self.divergence_factor is not None and self.initial_loss > 0
              and loss > self.divergence_factor * self.initial_loss):
            logger.error("❌ %s: divergencia (%.4g > %g × %.4g)", self.stage, loss,
                         self.divergence_factor, self.initial_loss)
            raise TrainingError(
                f"{self.stage}: divergencia, pérdida {loss:.6g} > {self.divergence_factor:g} × inicial {self.initial_loss:.6g}",
                epoch, step, self.last_finite,
            )
        self.last_finite = loss


class LossHistory:
    """Filas por época (epoch, train_loss, val_loss, ...) escribibles como CSV."""

    def __init__(self, columns: Optional[List[str]] = None):
        self.columns = columns or ["epoch", "train_loss", "val_loss"]
        self.rows: List[Dict[str, Any]] = []

    def append(self, **row: Any) -> None:
        self.rows.append({column: row.get(column, float("nan")) for column in self.columns})

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> List[float]:
        return [row[name] for row in self.rows]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=self.columns)

    def write_csv(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False, float_format=FLOAT_FORMAT)
        logger.info("💾 Historial de pérdidas guardado en %s", path)
        return path

    @classmethod
    def read_csv(cls, path: Union[str, Path]) -> "LossHistory":
        df = pd.read_csv(path)
        history = cls(list(df.columns))
        history.rows = df.to_dict(orient="records")
        return history


def mean_loss(total: float, count: int) -> float:
    return total / count if count else float("nan")
