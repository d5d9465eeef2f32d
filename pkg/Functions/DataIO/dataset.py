"""
Tipos del dataset video-fMRI y su contrato de directorio.

Un split vive en un directorio con:
- manifest.json: campos de DatasetManifest + sección de arrays
- fmri.f4 (N×V), frames.u8 (N×f×3×H×W, 8 bits por canal), captions.txt
- opcionalmente arrays de ground truth (gt_*) del generador sintético
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from Functions.errors import DatasetError
from .array_store import read_arrays, write_arrays

logger = logging.getLogger(__name__)

CAPTIONS_FILE = "captions.txt"
SPLITS = ("train", "test")
GT_PREFIX = "gt_"


@dataclass(frozen=True)
class DatasetManifest:
    """Descripción de un split (campos en DataIO_README.md)."""

    name: str
    split: str
    n_samples: int
    n_voxels: int
    frames_per_clip: int = 8
    frame_hz: float = 4.0
    frame_size: Tuple[int, int] = (64, 64)
    lag_seconds: float = 4.0
    tr_seconds: float = 2.0
    paths: Dict[str, str] = field(default_factory=lambda: {
        "fmri": "fmri.f4", "frames": "frames.u8", "captions": CAPTIONS_FILE,
    })

    def validate(self) -> "DatasetManifest":
        if self.split not in SPLITS:
            raise DatasetError(f"split={self.split!r} debe ser uno de {SPLITS}")
        if self.n_samples < 1:
            raise DatasetError(f"n_samples={self.n_samples} debe ser >= 1")
        if self.frames_per_clip < 2:
            raise DatasetError(f"frames_per_clip={self.frames_per_clip} debe ser >= 2")
        if self.n_voxels < 1:
            raise DatasetError(f"n_voxels={self.n_voxels} debe ser >= 1")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name, "split": self.split, "n_samples": self.n_samples,
            "n_voxels": self.n_voxels, "frames_per_clip": self.frames_per_clip,
            "frame_hz": self.frame_hz, "frame_size": list(self.frame_size),
            "lag_seconds": self.lag_seconds, "tr_seconds": self.tr_seconds,
            "paths": dict(self.paths),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DatasetManifest":
        try:
            return cls(
                name=data["name"], split=data["split"], n_samples=int(data["n_samples"]),
                n_voxels=int(data["n_voxels"]), frames_per_clip=int(data["frames_per_clip"]),
                frame_hz=float(data["frame_hz"]), frame_size=tuple(data["frame_size"]),
                lag_seconds=float(data["lag_seconds"]), tr_seconds=float(data["tr_seconds"]),
                paths=dict(data["paths"]),
            ).validate()
        except KeyError as e:
            raise DatasetError(f"Al manifest le falta el campo {e}") from e


@dataclass(frozen=True)
class FmriRecord:
    sample_id: int
    voxels: np.ndarray


@dataclass(frozen=True)
class VideoClip:
    """Clip f×3×H×W con valores en [0,1] y su caption (puede ser vacío)."""

    sample_id: int
    frames: np.ndarray
    caption: str = ""


@dataclass
class VideoDataset:
    """Split completo en memoria."""

    manifest: DatasetManifest
    fmri: np.ndarray
    frames: np.ndarray
    captions: List[str]
    ground_truth: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.fmri = np.asarray(self.fmri, dtype=np.float32)
        self.frames = np.asarray(self.frames, dtype=np.float32)
        check_dataset(self)

    def __len__(self) -> int:
        return self.manifest.n_samples

    @property
    def frame_size(self) -> Tuple[int, int]:
        return tuple(self.manifest.frame_size)

    def record(self, index: int) -> FmriRecord:
        return FmriRecord(sample_id=index, voxels=self.fmri[index])

    def clip(self, index: int) -> VideoClip:
        return VideoClip(sample_id=index, frames=self.frames[index], caption=self.captions[index])

    def subset(self, indices: Sequence[int]) -> "VideoDataset":
        """Sub-dataset con las muestras indicadas (el ground truth por muestra se recorta)."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size == 0:
            raise DatasetError("subset requiere al menos un índice")
        n = len(self)
        ground_truth = {
            key: (value[indices] if _is_per_sample(key, value, n) else value)
            for key, value in self.ground_truth.items()
        }
        if "repetitions" in self.ground_truth:
            ground_truth["repetitions"] = self.ground_truth["repetitions"][:, indices]
        manifest = _replace_manifest(self.manifest, n_samples=int(indices.size))
        return VideoDataset(manifest, self.fmri[indices], self.frames[indices],
                            [self.captions[i] for i in indices], ground_truth)

    def with_fmri(self, fmri: np.ndarray, ground_truth: Optional[Dict[str, np.ndarray]] = None) -> "VideoDataset":
        """Copia con otra matriz fMRI (p.ej. tras selección de voxels y z-score)."""
        fmri = np.asarray(fmri, dtype=np.float32)
        manifest = _replace_manifest(self.manifest, n_voxels=int(fmri.shape[1]))
        gt = dict(self.ground_truth if ground_truth is None else ground_truth)
        return VideoDataset(manifest, fmri, self.frames, list(self.captions), gt)


_PER_SAMPLE_KEYS = ("descriptors", "velocities", "centers", "attributes")


def _is_per_sample(key: str, value: np.ndarray, n: int) -> bool:
    return key in _PER_SAMPLE_KEYS and value.shape[:1] == (n,)


def _replace_manifest(manifest: DatasetManifest, **changes: Any) -> DatasetManifest:
    data = manifest.to_dict()
    data.update(changes)
    return DatasetManifest.from_dict(data)


def check_dataset(dataset: VideoDataset) -> None:
    """Verifica formas, rango de píxeles y finitud contra el manifest."""
    m = dataset.manifest.validate()
    height, width = m.frame_size
    if dataset.fmri.shape != (m.n_samples, m.n_voxels):
        raise DatasetError(f"fmri con forma {dataset.fmri.shape}; el manifest declara {(m.n_samples, m.n_voxels)}")
    expected = (m.n_samples, m.frames_per_clip, 3, height, width)
    if dataset.frames.shape != expected:
        raise DatasetError(f"frames con forma {dataset.frames.shape}; el manifest declara {expected}")
    if len(dataset.captions) != m.n_samples:
        raise DatasetError(f"{len(dataset.captions)} captions para {m.n_samples} muestras")
    if not np.all(np.isfinite(dataset.fmri)):
        raise DatasetError("fmri contiene valores no finitos")
    if dataset.frames.min(initial=0.0) < 0.0 or dataset.frames.max(initial=0.0) > 1.0:
        raise DatasetError("los píxeles deben estar en [0, 1]")


def frames_to_u8(frames: np.ndarray) -> np.ndarray:
    """[0,1] -> 8 bits por canal."""
    return np.rint(np.clip(frames, 0.0, 1.0) * 255.0).astype(np.uint8)


def frames_from_u8(frames_u8: np.ndarray) -> np.ndarray:
    """8 bits -> [0,1] float32 (misma operación en generación y lectura)."""
    return frames_u8.astype(np.float32) / np.float32(255.0)


def write_dataset(dataset: VideoDataset, directory: Union[str, Path]) -> Path:
    """
    Escribe un split según el contrato de directorio.

    Los frames se guardan en 8 bits: un dataset cuyos frames ya están en la
    grilla k/255 se relee bit a bit idéntico.
    """
    directory = Path(directory)
    m = dataset.manifest
    arrays: Dict[str, np.ndarray] = {
        "fmri": dataset.fmri.astype(np.float32),
        "frames": frames_to_u8(dataset.frames),
    }
    for key, value in dataset.ground_truth.items():
        arrays[GT_PREFIX + key] = value

    write_arrays(directory, arrays, meta=m.to_dict())
    lines = [caption.replace("\n", " ") for caption in dataset.captions]
    (directory / m.paths["captions"]).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("💾 Dataset %s/%s guardado en %s (%d muestras)", m.name, m.split, directory, m.n_samples)
    return directory


def read_dataset(directory: Union[str, Path]) -> VideoDataset:
    """Lee un split escrito con write_dataset; DatasetError si algo no cuadra."""
    directory = Path(directory)
    meta, arrays = read_arrays(directory)
    manifest = DatasetManifest.from_dict(meta)

    captions_path = directory / manifest.paths["captions"]
    if not captions_path.exists():
        raise DatasetError(f"Falta el archivo de captions {captions_path}")
    captions = captions_path.read_text(encoding="utf-8").split("\n")[:manifest.n_samples]
    if "fmri" not in arrays or "frames" not in arrays:
        raise DatasetError(f"{directory} no contiene los arrays 'fmri' y 'frames'")

    ground_truth = {
        name[len(GT_PREFIX):]: value for name, value in arrays.items() if name.startswith(GT_PREFIX)
    }
    dataset = VideoDataset(manifest, arrays["fmri"], frames_from_u8(arrays["frames"]),
                           captions, ground_truth)
    logger.info("📂 Dataset %s/%s cargado: %d muestras, %d voxels",
                manifest.name, manifest.split, manifest.n_samples, manifest.n_voxels)
    return dataset
