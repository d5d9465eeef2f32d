"""
Registro de backends por tipo y nombre.

Las entradas son rutas "modulo:Clase" que se importan recién al pedir el
backend; así los backends toy de Evaluation y Generator pueden registrarse
aquí sin importar esos paquetes al cargar Encoders.
"""

import importlib
import logging
from typing import Any, Dict, List

from Functions.errors import EncoderError

logger = logging.getLogger(__name__)

_REGISTRY: Dict[str, Dict[str, str]] = {
    "embedder": {"toy": "Functions.Encoders.toy_backends:ToyEmbedder"},
    "tokenizer": {"toy": "Functions.Encoders.toy_backends:ToyTokenizer"},
    "conditioner": {"toy": "Functions.Encoders.toy_backends:ToyConditioner"},
    "classifier": {"toy": "Functions.Evaluation.classification:ToyClassifier"},
    "flow": {"toy": "Functions.Evaluation.flow:BlockMatchingFlow"},
    "generator": {"toy": "Functions.Generator.VideoGenerator:ToyFrameGenerator"},
}


def registered_names(kind: str) -> List[str]:
    """Nombres registrados para un tipo de backend."""
    if kind not in _REGISTRY:
        raise EncoderError(f"Tipo de backend desconocido {kind!r}. Tipos: {sorted(_REGISTRY)}")
    return sorted(_REGISTRY[kind])


def register_backend(kind: str, name: str, target: str) -> None:
    """
    Registra un backend adicional (plugin).

    Args:
        kind: Tipo ('embedder', 'tokenizer', ...)
        name: Nombre con el que se elige en la configuración
        target: Ruta "paquete.modulo:Clase"; la clase recibe name= al construirse
    """
    if ":" not in target:
        raise EncoderError(f"target debe tener la forma 'modulo:Clase', no {target!r}")
    registered_names(kind)
    if name in _REGISTRY[kind]:
        logger.warning("⚠️ Backend %s/%s reemplazado por %s", kind, name, target)
    _REGISTRY[kind][name] = target


def get_backend(kind: str, name: str) -> Any:
    """Construye el backend `name` del tipo `kind`."""
    names = registered_names(kind)
    if name not in names:
        raise EncoderError(f"Backend {kind} {name!r} no registrado. Disponibles: {names}")

    module_path, attribute = _REGISTRY[kind][name].split(":", 1)
    try:
        factory = getattr(importlib.import_module(module_path), attribute)
    except (ImportError, AttributeError) as e:
        raise EncoderError(f"No se pudo cargar el backend {kind}/{name}: {e}") from e
    logger.debug("📂 Backend %s/%s -> %s", kind, name, _REGISTRY[kind][name])
    return factory(name=name)
