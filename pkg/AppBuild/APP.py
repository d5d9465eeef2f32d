"""
CLI de MindKit.

    python -m AppBuild.APP [--config FILE] [--out DIR] [--set CLAVE=VALOR ...] [--verbose] <verbo> ...

Verbos: synth, prepare, train {semantic,structure,cmg,perframe},
reconstruct, evaluate, analyze {shuffle,importance,guidance,motion,variants}, retrieve.

Códigos de salida: 0 éxito, 1 configuración inválida o artefacto faltante,
2 cualquier otro fallo.
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence

try:
    from .artifacts import ArtifactLayout
    from . import commands
except ImportError:
    # ejecución directa del archivo
    import os
    sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from AppBuild.artifacts import ArtifactLayout
    from AppBuild import commands

from Functions import __version__
from Functions.Config import load_run_config
from Functions.errors import ConfigError, MindKitError

logger = logging.getLogger("mindkit")

DEFAULT_OUT = "runs/default"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def parse_overrides(items: Optional[Sequence[str]]) -> Dict[str, str]:
    """Convierte ['clave=valor', ...] de --set en un diccionario."""
    overrides: Dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set espera CLAVE=VALOR, se recibió {item!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mindkit", description="Reconstrucción de video desde fMRI a escala de escritorio")
    parser.add_argument("--config", help="Archivo clave=valor con la configuración")
    parser.add_argument("--out", default=DEFAULT_OUT, help="Directorio raíz de artefactos")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="CLAVE=VALOR",
                        help="Sobrescribe una clave de configuración (repetible)")
    parser.add_argument("--verbose", action="store_true", help="Log a nivel DEBUG")
    parser.add_argument("--version", action="version", version=f"mindkit {__version__}")

    verbs = parser.add_subparsers(dest="verb", required=True)
    verbs.add_parser("synth", help="Genera el dataset sintético train/test")
    verbs.add_parser("prepare", help="Selección de voxels y z-score")

    train = verbs.add_parser("train", help="Entrena una etapa")
    train.add_argument("stage", choices=commands.TRAIN_STAGES)

    reconstruct = verbs.add_parser("reconstruct", help="Reconstruye los clips de test")
    reconstruct.add_argument("--substitute", action="append", default=[], metavar="FEATURE=MODO",
                             help="semantic=noise, structure=noise, motion=noise|mlp (repetible)")
    reconstruct.add_argument("--tag", help="Nombre de la reconstrucción")
    reconstruct.add_argument("--ground-truth", action="store_true",
                             help="Usa los features verdaderos del test (techo de ruido)")

    evaluate = verbs.add_parser("evaluate", help="Calcula las métricas de una reconstrucción")
    evaluate.add_argument("--tag", default=commands.DEFAULT_TAG)
    evaluate.add_argument("--xlsx", action="store_true", help="Escribe además metrics.xlsx")

    analyze = verbs.add_parser("analyze", help="Test de orden, importancia o ablaciones")
    analyze.add_argument("kind", choices=commands.ANALYSES)
    analyze.add_argument("--tag", default=commands.DEFAULT_TAG, help="Reconstrucción para el test de orden")

    verbs.add_parser("retrieve", help="Top-k de recuperación fMRI -> video")
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO, format=LOG_FORMAT, force=True)


def run(args: argparse.Namespace) -> Dict:
    config = load_run_config(args.config, parse_overrides(args.overrides))
    layout = ArtifactLayout.from_config(args.out, config)
    if args.verb == "synth":
        return commands.cmd_synth(config, layout)
    if args.verb == "prepare":
        return commands.cmd_prepare(config, layout)
    if args.verb == "train":
        return commands.cmd_train(config, layout, args.stage)
    if args.verb == "reconstruct":
        return commands.cmd_reconstruct(config, layout, args.substitute, args.tag, args.ground_truth)
    if args.verb == "evaluate":
        return commands.cmd_evaluate(config, layout, args.tag, args.xlsx)
    if args.verb == "analyze":
        return commands.cmd_analyze(config, layout, args.kind, args.tag)
    return commands.cmd_retrieve(config, layout)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        summary = run(args)
    except MindKitError as e:
        logger.error("❌ %s", e)
        logger.debug("Traceback", exc_info=True)
        return e.exit_code
    except Exception as e:
        logger.error("❌ Fallo inesperado: %s", e)
        logger.debug("Traceback", exc_info=True)
        return 2
    for line in commands.summary_lines(summary):
        print(line)
    logger.info("✅ %s completado", args.verb)
    return 0


if __name__ == '__main__':
    sys.exit(main())
