"""
Figuras estáticas (PNG) de los artefactos: curvas de pérdida, barras de
métricas con CI, mapa de importancia y histogramas de P-values.

Backend Agg y metadata sin 'Software' para que dos corridas iguales
produzcan archivos idénticos.
"""

import logging
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

logger = logging.getLogger(__name__)

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
}


def _save(fig: plt.Figure, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
    logger.info("💾 Figura guardada en %s", path)
    return path


def plot_loss_curves(history: pd.DataFrame, path: Union[str, Path], title: str = "") -> Path:
    """train_loss y val_loss por época."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for column in ("train_loss", "val_loss"):
            if column in history and history[column].notna().any():
                ax.plot(history["epoch"], history[column], label=column.replace("_", " "))
        ax.set_xlabel("época")
        ax.set_ylabel("pérdida")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def plot_metric_bars(aggregates: pd.DataFrame, path: Union[str, Path], title: str = "") -> Path:
    """Una barra por métrica (media) con el CI bootstrap como barra de error."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(8.0, 4.0))
        means = aggregates["mean"].to_numpy()
        errors = np.vstack([means - aggregates["ci_low"].to_numpy(), aggregates["ci_high"].to_numpy() - means])
        ax.bar(aggregates["metric"], means, yerr=np.clip(errors, 0.0, None), capsize=3, color="tab:blue")
        ax.set_ylabel("media (CI 95%)")
        ax.set_title(title)
        ax.tick_params(axis="x", rotation=30)
        fig.tight_layout()
        return _save(fig, path)


def plot_importance(weights: np.ndarray, path: Union[str, Path],
                    roi_means: Optional[Mapping[str, float]] = None, title: str = "") -> Path:
    """Pesos por voxel como imagen (fila única reacomodada en grilla) y, si hay, barras por ROI."""
    weights = np.asarray(weights, dtype=np.float64)
    side = int(np.ceil(np.sqrt(weights.size)))
    grid = np.full(side * side, np.nan)
    grid[:weights.size] = weights
    n_axes = 2 if roi_means else 1
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, n_axes, figsize=(5.0 * n_axes, 4.0), squeeze=False)
        image = axes[0, 0].imshow(grid.reshape(side, side), cmap="viridis", vmin=0.0, vmax=1.0)
        axes[0, 0].set_title(title or "importancia por voxel")
        axes[0, 0].grid(False)
        fig.colorbar(image, ax=axes[0, 0])
        if roi_means:
            axes[0, 1].barh(list(roi_means), list(roi_means.values()), color="tab:orange")
            axes[0, 1].set_xlabel("importancia media")
        fig.tight_layout()
        return _save(fig, path)


def plot_pvalue_histograms(p_values: Mapping[str, Sequence[float]], path: Union[str, Path],
                           title: str = "") -> Path:
    """Histograma de P-values (media por muestra) para cada métrica del test de orden."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        bins = np.linspace(0.0, 1.0, 21)
        for metric, values in p_values.items():
            ax.hist(np.asarray(values, dtype=np.float64), bins=bins, alpha=0.6, label=metric)
        ax.set_xlabel("P")
        ax.set_ylabel("muestras")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        return _save(fig, path)
