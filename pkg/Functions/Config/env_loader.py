"""
Cargador de variables de configuración para MindKit.
Lee un archivo clave=valor (formato .env) y lo complementa con variables de
entorno MINDKIT_* del sistema, que tienen prioridad.
"""

import logging
import os
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from Functions.errors import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "MINDKIT_"


def parse_env_file(env_path: Union[str, Path]) -> Dict[str, str]:
    """
    Lee un archivo clave=valor.

    Las líneas vacías y las que empiezan con '#' se ignoran; el primer '=' separa
    clave y valor. Las claves se devuelven en mayúsculas.

    Args:
        env_path: Ruta del archivo

    Returns:
        Dict clave -> valor (sin convertir)
    """
    env_path = Path(env_path)
    if not env_path.exists():
        raise ConfigError(f"Archivo de configuración no encontrado: {env_path}")

    values: Dict[str, str] = {}
    with open(env_path, "r", encoding="utf-8") as file:
        for number, line in enumerate(file, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"Línea {number} de {env_path} sin '=': {line!r}")
            key, value = line.split("=", 1)
            # comentarios al final de la línea
            value = value.split(" #", 1)[0]
            values[key.strip().upper()] = value.strip()
    return values


def load_env(env_path: Optional[Union[str, Path]] = None,
             environ: Optional[Mapping[str, str]] = None) -> Dict[str, str]:
    """
    Carga variables desde el archivo (si se indica) y desde os.environ.

    1. Archivo clave=valor (opcional).
    2. Variables MINDKIT_<CLAVE> del entorno, que sobreescriben al archivo.
    """
    env_vars: Dict[str, str] = {}

    if env_path is not None:
        env_vars.update(parse_env_file(env_path))
        logger.debug("📂 %d claves leídas de %s", len(env_vars), env_path)

    environ = os.environ if environ is None else environ
    for name, value in environ.items():
        if name.startswith(ENV_PREFIX):
            key = name[len(ENV_PREFIX):].upper()
            if key in env_vars:
                logger.info("⚠️ %s sobreescribe %s del archivo", name, key)
            env_vars[key] = value

    return env_vars
