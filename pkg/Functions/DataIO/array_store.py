"""
Contenedor de arrays en disco: un directorio con manifest.json y un archivo
binario crudo (little-endian, row-major) por array.

Lo usan los datasets, los estados de los decodificadores, las
reconstrucciones y los mapas de importancia.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from Functions.errors import DatasetError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
ARRAYS_KEY = "arrays"


def write_json(path: Union[str, Path], data: Mapping[str, Any]) -> Path:
    """Guarda un dict como JSON canónico (indent 2, claves ordenadas, UTF-8)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    """Carga un JSON; DatasetError si no existe o está corrupto."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"Archivo no encontrado: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DatasetError(f"JSON inválido en {path}: {e}") from e


def storage_dtype(array: np.ndarray) -> str:
    """dtype de disco: '|u1' para uint8/bool, '<i8' para enteros, '<f4' para reales."""
    if array.dtype == np.uint8 or array.dtype == np.bool_:
        return "|u1"
    if np.issubdtype(array.dtype, np.integer):
        return "<i8"
    if np.issubdtype(array.dtype, np.floating):
        return "<f4"
    raise DatasetError(f"dtype no soportado para el contenedor: {array.dtype}")


def write_arrays(directory: Union[str, Path], arrays: Mapping[str, np.ndarray],
                 meta: Optional[Mapping[str, Any]] = None) -> Path:
    """
    Escribe arrays + manifest en un directorio.

    Args:
        directory: Directorio destino (se crea si no existe)
        arrays: nombre -> array; el nombre del archivo es <nombre>.<ext>
        meta: Campos adicionales del manifest

    Returns:
        Ruta del manifest escrito
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    entries: Dict[str, Dict[str, Any]] = {}
    for name, array in sorted(arrays.items()):
        array = np.asarray(array)
        dtype = storage_dtype(array)
        if dtype == "<f4" and not np.all(np.isfinite(array)):
            raise DatasetError(f"El array '{name}' contiene valores no finitos")
        filename = f"{name}.{'u8' if dtype == '|u1' else dtype[1:]}"
        (directory / filename).write_bytes(np.ascontiguousarray(array.astype(dtype)).tobytes())
        entries[name] = {"path": filename, "dtype": dtype, "shape": list(array.shape)}

    manifest = dict(meta or {})
    manifest[ARRAYS_KEY] = entries
    path = write_json(directory / MANIFEST_NAME, manifest)
    logger.debug("💾 %d arrays escritos en %s", len(entries), directory)
    return path


def read_arrays(directory: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, np.ndarray]]:
    """
    Lee un directorio escrito con write_arrays.

    Verifica que cada archivo exista y que su largo en bytes coincida con la
    forma declarada.

    Returns:
        (manifest sin la sección de arrays, dict nombre -> array)
    """
    directory = Path(directory)
    manifest = read_json(directory / MANIFEST_NAME)
    entries = manifest.pop(ARRAYS_KEY, None)
    if entries is None:
        raise DatasetError(f"{directory / MANIFEST_NAME} no declara '{ARRAYS_KEY}'")

    arrays: Dict[str, np.ndarray] = {}
    for name, entry in entries.items():
        path = directory / entry["path"]
        if not path.exists():
            raise DatasetError(f"Falta el archivo {path} declarado en el manifest")
        dtype = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        raw = path.read_bytes()
        expected = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if len(raw) != expected:
            raise DatasetError(
                f"{path}: {len(raw)} bytes, se esperaban {expected} para forma {shape} y dtype {dtype.str}"
            )
        arrays[name] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()

    logger.debug("📂 %d arrays leídos de %s", len(arrays), directory)
    return manifest, arrays
