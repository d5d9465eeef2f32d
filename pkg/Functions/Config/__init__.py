"""
Módulo Config: carga y validación de la configuración de corrida.
"""

from .env_loader import ENV_PREFIX, load_env, parse_env_file
from .run_config import (
    BACKEND_KINDS,
    CMG_VARIANTS,
    RunConfig,
    build_config,
    config_from_json,
    load_run_config,
    validate_config,
)

__all__ = [
    'ENV_PREFIX',
    'load_env',
    'parse_env_file',
    'BACKEND_KINDS',
    'CMG_VARIANTS',
    'RunConfig',
    'build_config',
    'config_from_json',
    'load_run_config',
    'validate_config',
]
