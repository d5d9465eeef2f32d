"""
Mapas de importancia por voxel a partir de los pesos de los decodificadores.

Se multiplican las matrices de pesos de las capas lineales (las activaciones
y el dropout se ignoran), se promedia |W| sobre la dimensión de salida y se
normaliza min-max a [0,1]. Los promedios por ROI salen de un vector de
etiquetas por voxel.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import torch.nn as nn
from sklearn.metrics import roc_auc_score

from Functions.DataImport import extract_column, read_table_to_df
from Functions.DataIO.array_store import read_arrays, write_arrays
from Functions.errors import AnalysisError, TableError
from Functions.MotionGenerator import CmgState
from Functions.SemanticDecoder import SemanticDecoderState
from Functions.StructureDecoder import StructureDecoderState

logger = logging.getLogger(__name__)

IGNORED_LAYERS = (nn.GELU, nn.ReLU, nn.SiLU, nn.Tanh, nn.Dropout, nn.Identity)
IMPORTANCE_KIND = "importance"


@dataclass
class ImportanceMap:
    weights: np.ndarray
    kind: str
    roi_means: Dict[str, float] = field(default_factory=dict)

    @property
    def n_voxels(self) -> int:
        return int(self.weights.size)


def linear_layers(module: nn.Module) -> List[nn.Linear]:
    """Capas lineales en orden; cualquier otra capa no ignorable es un error."""
    if isinstance(module, nn.Linear):
        return [module]
    layers = []
    for name, child in module.named_children():
        if isinstance(child, nn.Linear):
            layers.append(child)
        elif isinstance(child, IGNORED_LAYERS):
            continue
        elif isinstance(child, nn.Sequential):
            layers.extend(linear_layers(child))
        else:
            raise AnalysisError(f"la capa '{name}' ({type(child).__name__}) no es lineal; "
                                f"el mapa de importancia requiere capas lineales")
    if not layers:
        raise AnalysisError(f"{type(module).__name__} no contiene capas lineales")
    return layers


def _decoder_module(decoder) -> Tuple[nn.Module, str]:
    if isinstance(decoder, SemanticDecoderState):
        return decoder.model.trunk, "semantic"
    if isinstance(decoder, StructureDecoderState):
        return decoder.model.mlp, "structure"
    if isinstance(decoder, CmgState):
        return decoder.model.fmri_embed, "motion"
    if isinstance(decoder, nn.Module):
        return decoder, "module"
    raise AnalysisError(f"No se puede calcular importancia para {type(decoder).__name__}")


def normalize_min_max(values: np.ndarray) -> np.ndarray:
    """Min-max a [0,1]; un mapa constante queda en 1."""
    low, high = values.min(), values.max()
    if high - low <= 0:
        return np.ones_like(values)
    return (values - low) / (high - low)


def voxel_importance(decoder, kind: Optional[str] = None) -> ImportanceMap:
    """
    Importancia por voxel de un decodificador.

    Args:
        decoder: SemanticDecoderState, StructureDecoderState, CmgState o un nn.Module lineal
        kind: Nombre del decodificador en el mapa (por defecto se deduce)

    Returns:
        ImportanceMap con pesos en [0,1] (máximo 1)
    """
    module, default_kind = _decoder_module(decoder)
    product = None
    for layer in linear_layers(module):
        weight = layer.weight.detach().double().cpu().numpy()
        product = weight if product is None else weight @ product
    importance = np.abs(product.T).mean(axis=1)
    return ImportanceMap(weights=normalize_min_max(importance).astype(np.float32), kind=kind or default_kind)


def roi_importance(importance: ImportanceMap, roi_labels: np.ndarray,
                   names: Optional[Mapping[int, str]] = None) -> Dict[str, float]:
    """
    Media de la importancia de los voxels de cada ROI.

    Args:
        importance: ImportanceMap
        roi_labels: Etiqueta entera por voxel (negativa = sin ROI)
        names: etiqueta -> nombre; una ROI nombrada sin voxels se excluye con aviso

    Returns:
        {nombre de ROI: importancia media}
    """
    roi_labels = np.asarray(roi_labels, dtype=np.int64)
    if roi_labels.shape != importance.weights.shape:
        raise AnalysisError(f"{roi_labels.size} etiquetas de ROI para {importance.n_voxels} voxels")
    labels = sorted(set(int(v) for v in roi_labels if v >= 0) | set(int(k) for k in (names or {})))
    means = {}
    for label in labels:
        name = (names or {}).get(label, f"roi_{label}")
        members = roi_labels == label
        if not members.any():
            logger.warning("⚠️ La ROI %r no tiene voxels; se excluye", name)
            continue
        means[name] = float(importance.weights[members].mean())
    importance.roi_means = means
    return means


def roi_importance_table(maps: Sequence[ImportanceMap], roi_labels: np.ndarray,
                         names: Optional[Mapping[int, str]] = None) -> pd.DataFrame:
    """
    Tabla ROI × decodificador con normalización por decodificador: cada
    columna suma 1 (proporción de la importancia que cae en cada ROI).
    """
    columns = {}
    for importance in maps:
        means = roi_importance(importance, roi_labels, names)
        total = sum(means.values())
        columns[importance.kind] = {roi: (value / total if total > 0 else 0.0) for roi, value in means.items()}
    table = pd.DataFrame(columns)
    table.index.name = "roi"
    return table.reset_index()


def importance_auc(importance: ImportanceMap, signal_indices: Sequence[int]) -> float:
    """ROC-AUC de voxels de señal vs. el resto, usando la importancia como puntaje."""
    labels = np.zeros(importance.n_voxels, dtype=np.int64)
    labels[np.asarray(signal_indices, dtype=np.int64)] = 1
    if labels.sum() in (0, labels.size):
        raise AnalysisError("importance_auc requiere voxels de señal y de ruido")
    return float(roc_auc_score(labels, importance.weights))


def read_roi_labels(labels_path: Union[str, Path],
                    names_path: Optional[Union[str, Path]] = None) -> Tuple[np.ndarray, Dict[int, str]]:
    """
    Lee las etiquetas de ROI (columna 'label', una fila por voxel) y,
    opcionalmente, la tabla de nombres (columnas 'label' y 'name').
    """
    labels_df = read_table_to_df(labels_path)
    labels = extract_column(labels_df, "label").to_numpy(dtype=np.int64)
    names: Dict[int, str] = {}
    if names_path:
        names_df = read_table_to_df(names_path)
        try:
            names = {int(label): str(name) for label, name in
                     zip(extract_column(names_df, "label"), extract_column(names_df, "name"))}
        except ValueError as e:
            raise TableError(f"Tabla de nombres de ROI inválida '{names_path}': {e}") from e
    logger.info("📂 %d etiquetas de ROI leídas (%d nombres)", labels.size, len(names))
    return labels, names


def write_importance(directory: Union[str, Path], importance: ImportanceMap) -> Path:
    """Pesos como array plano <f4 (para graficar sobre superficie cortical afuera) + manifest."""
    return write_arrays(directory, {"weights": importance.weights},
                        {"kind": IMPORTANCE_KIND, "decoder": importance.kind, "roi_means": importance.roi_means})


def read_importance(directory: Union[str, Path]) -> ImportanceMap:
    meta, arrays = read_arrays(directory)
    if meta.get("kind") != IMPORTANCE_KIND:
        raise AnalysisError(f"{directory} no contiene un mapa de importancia")
    return ImportanceMap(weights=arrays["weights"], kind=meta["decoder"], roi_means=dict(meta.get("roi_means", {})))
