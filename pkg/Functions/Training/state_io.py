"""
Persistencia de estados entrenados (módulos torch) en el contenedor de arrays.

Cada parámetro se guarda como un array float32; el manifest lleva la
configuración usada y su hash, para que el estado sea autodescriptivo.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np
import torch

from Functions.DataIO.array_store import read_arrays, write_arrays
from Functions.errors import DecoderError

logger = logging.getLogger(__name__)


def save_module(directory: Union[str, Path], module: torch.nn.Module, kind: str,
                meta: Mapping[str, Any]) -> Path:
    """Guarda el state_dict de un módulo + metadatos (config, forma de entrada, ...)."""
    arrays = {name: tensor.detach().cpu().numpy().astype(np.float32)
              for name, tensor in module.state_dict().items()}
    manifest = {"kind": kind, **meta}
    path = write_arrays(directory, arrays, meta=manifest)
    logger.info("💾 Estado %s guardado en %s (%d tensores)", kind, directory, len(arrays))
    return path


def load_arrays_for(directory: Union[str, Path], kind: str) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """Lee un estado y verifica que sea del tipo esperado."""
    meta, arrays = read_arrays(directory)
    if meta.get("kind") != kind:
        raise DecoderError(f"{directory} contiene un estado '{meta.get('kind')}', se esperaba '{kind}'")
    logger.info("📂 Estado %s cargado desde %s", kind, directory)
    return meta, arrays


def load_module_arrays(module: torch.nn.Module, arrays: Mapping[str, np.ndarray]) -> torch.nn.Module:
    """Copia arrays en los parámetros/buffers del módulo (nombres y formas deben coincidir)."""
    expected = module.state_dict()
    missing = sorted(set(expected) - set(arrays))
    if missing:
        raise DecoderError(f"Faltan tensores en el estado guardado: {missing}")
    state = {name: torch.from_numpy(np.asarray(arrays[name])).to(expected[name].dtype)
             for name in expected}
    module.load_state_dict(state)
    return module
