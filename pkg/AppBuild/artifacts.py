"""
Layout de artefactos bajo --out, run logs y chequeo de prerequisitos.

    data/{train,test}                       cmd_synth
    prepared/{train,test,preprocessing}     cmd_prepare
    states/{semantic,structure,cmg,perframe} cmd_train
    reconstructions/<tag>                   cmd_reconstruct
    reports/<tag>, reports/retrieval        cmd_evaluate, cmd_retrieve
    analysis/<kind>                         cmd_analyze
    plots/                                  figuras de todas las etapas

Cada directorio de etapa lleva config.json (instantánea validada) y
run_log.json (hash de config, semilla, versión, etapa y hashes de entrada).
"""

import logging
import subprocess
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

from Functions import __version__
from Functions.Config import RunConfig
from Functions.DataIO.array_store import read_json, write_json
from Functions.errors import MissingArtifactError

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.json"
RUN_LOG_FILE = "run_log.json"
REPO_ROOT = Path(__file__).resolve().parent.parent

# etapa -> comando que la produce
PRODUCERS = {
    "data": "synth",
    "prepared": "prepare",
    "semantic": "train semantic",
    "structure": "train structure",
    "cmg": "train cmg",
    "perframe": "train perframe",
    "reconstructions": "reconstruct",
}


class ArtifactLayout:
    def __init__(self, root: Union[str, Path], dataset_path: str = "data", prepared_path: str = "prepared"):
        self.root = Path(root)
        self._dataset_path = dataset_path
        self._prepared_path = prepared_path

    @classmethod
    def from_config(cls, root: Union[str, Path], config: RunConfig) -> "ArtifactLayout":
        return cls(root, config.dataset_path, config.prepared_path)

    @property
    def data(self) -> Path:
        return self.resolve(self._dataset_path)

    @property
    def prepared(self) -> Path:
        return self.resolve(self._prepared_path)

    def state(self, stage: str) -> Path:
        return self.root / "states" / stage

    def reconstructions(self, tag: str) -> Path:
        return self.root / "reconstructions" / tag

    def report(self, tag: str) -> Path:
        return self.root / "reports" / tag

    def analysis(self, kind: str) -> Path:
        return self.root / "analysis" / kind

    @property
    def plots(self) -> Path:
        return self.root / "plots"

    def resolve(self, path: str) -> Path:
        """Rutas de la config: relativas a --out salvo que sean absolutas."""
        candidate = Path(path)
        return candidate if candidate.is_absolute() else self.root / candidate


def version_string() -> str:
    """'mindkit-<versión>' más `git describe --always --dirty` si hay repositorio."""
    version = f"mindkit-{__version__}"
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"], cwd=REPO_ROOT, capture_output=True, text=True,
            timeout=5, check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        return version
    return f"{version}+{described}" if described else version


def require(path: Path, stage: str, marker: str = "manifest.json") -> Path:
    """Verifica que exista el artefacto de una etapa previa."""
    if not (path / marker).exists():
        raise MissingArtifactError(stage, str(path), PRODUCERS.get(stage, stage))
    return path


def read_config_hash(directory: Path) -> Optional[str]:
    log_path = directory / RUN_LOG_FILE
    if not log_path.exists():
        return None
    return read_json(log_path).get("config_hash")


def write_run_log(directory: Union[str, Path], config: RunConfig, stage: str,
                  inputs: Optional[Mapping[str, Path]] = None, extra: Optional[Mapping] = None) -> Path:
    """
    Escribe config.json y run_log.json en el directorio de una etapa.

    Args:
        directory: Directorio del artefacto
        config: Configuración validada de la corrida
        stage: Nombre de la etapa
        inputs: nombre -> directorio de cada artefacto de entrada (se registra su hash de config)
        extra: Campos adicionales del run log
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(directory / CONFIG_FILE, config.to_dict())
    input_hashes: Dict[str, Optional[str]] = {name: read_config_hash(Path(path))
                                              for name, path in (inputs or {}).items()}
    log = {"config_hash": config.config_hash(), "seed": config.seed, "version": version_string(),
           "stage": stage, "inputs": input_hashes, **(extra or {})}
    path = write_json(directory / RUN_LOG_FILE, log)
    logger.debug("💾 Run log de '%s' en %s", stage, directory)
    return path
