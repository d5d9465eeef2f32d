#!/usr/bin/env python3
"""
Corrida piloto sobre el dataset sintético: pipeline completo por la CLI y
chequeo de las direcciones esperadas.

    a) retrieval top-1 >= 5 × azar
    b) EPE del CMG < EPE del baseline de MLPs por frame (media)
    c) EPE sin guía fMRI > EPE con guía fMRI (media)
    d) sobre el ground truth, p medio del test de orden: EPE < CLIP-pcc

También se imprimen, sin afectar el código de salida, la pérdida final de
las variantes de fusión temporales frente a la variante por defecto y el
acuerdo de signo entre la velocidad verdadera y el centroide reconstruido.

La configuración por defecto es la escala de aceptación (500/100 clips,
512 voxels, frames 64×64).

Uso:
    python scripts/pilot_run.py --out runs/pilot [--config configs/pilot_acceptance.env] [--set CLAVE=VALOR ...]
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(REPO_ROOT)

import pandas as pd  # noqa: E402

from AppBuild.APP import main as cli  # noqa: E402
from Functions.DataIO import read_json, read_prepared  # noqa: E402
from Functions.Evaluation import velocity_sign_agreement  # noqa: E402
from Functions.Generator import read_reconstructions  # noqa: E402

logger = logging.getLogger("pilot")

RETRIEVAL_FACTOR = 5.0
SIGN_AGREEMENT = 0.9
DEFAULT_CONFIG = os.path.join(REPO_ROOT, "configs", "pilot_acceptance.env")

STEPS = (
    ["synth"],
    ["prepare"],
    ["train", "semantic"],
    ["train", "structure"],
    ["train", "cmg"],
    ["train", "perframe"],
    ["reconstruct"],
    ["reconstruct", "--ground-truth"],
    ["evaluate"],
    ["evaluate", "--tag", "ground_truth"],
    ["retrieve"],
    ["analyze", "motion"],
    ["analyze", "guidance"],
    ["analyze", "shuffle", "--tag", "ground_truth"],
    ["analyze", "importance"],
    ["analyze", "variants"],
)


def run_pipeline(out: str, config: Optional[str], overrides: List[str]) -> None:
    prefix = ["--out", out] + (["--config", config] if config else [])
    for item in overrides:
        prefix += ["--set", item]
    for step in STEPS:
        logger.info("▶️ %s", " ".join(step))
        code = cli(prefix + step)
        if code != 0:
            raise SystemExit(f"'{' '.join(step)}' terminó con código {code}")


def check_thresholds(out: Path) -> pd.DataFrame:
    retrieval = read_json(out / "reports" / "retrieval" / "retrieval.json")
    motion = read_json(out / "analysis" / "motion" / "motion.json")["means"]
    guidance = read_json(out / "analysis" / "guidance" / "guidance.json")["means"]
    shuffle = read_json(out / "analysis" / "shuffle_ground_truth" / "shuffle.json")
    p_epe, p_clip = shuffle["epe"]["overall_mean"], shuffle["clip_pcc"]["overall_mean"]
    top1, chance = retrieval["top_k"]["1"], retrieval["chance"]["1"]
    rows = [
        {"check": "retrieval top-1 >= 5x azar", "value": top1, "reference": RETRIEVAL_FACTOR * chance,
         "passed": top1 >= RETRIEVAL_FACTOR * chance},
        {"check": "EPE cmg < per_frame_mlp", "value": motion["cmg"], "reference": motion["per_frame_mlp"],
         "passed": motion["cmg"] < motion["per_frame_mlp"]},
        {"check": "EPE with_fmri < without_fmri", "value": guidance["with_fmri"],
         "reference": guidance["without_fmri"], "passed": guidance["with_fmri"] < guidance["without_fmri"]},
        {"check": "orden sobre ground truth: p EPE < p CLIP-pcc", "value": p_epe, "reference": p_clip,
         "passed": p_epe is not None and p_clip is not None and p_epe < p_clip},
    ]
    return pd.DataFrame(rows)


def diagnostics(out: Path) -> pd.DataFrame:
    """Direcciones informativas: se imprimen pero no deciden el código de salida."""
    final = read_json(out / "analysis" / "variants" / "variants.json")["final_train_loss"]
    rows = [{"check": f"pérdida final {variant} > cross_attention", "value": final[variant],
             "reference": final["cross_attention"], "holds": final[variant] > final["cross_attention"]}
            for variant in ("temporal_cross", "temporal_adaLN")]
    recon = read_reconstructions(out / "reconstructions" / "default")
    _, test, _ = read_prepared(out / "prepared")
    agreement = velocity_sign_agreement(recon.frames, test.ground_truth["velocities"][recon.sample_ids])
    rows.append({"check": "signo de la velocidad del centroide", "value": agreement, "reference": SIGN_AGREEMENT,
                 "holds": agreement >= SIGN_AGREEMENT})
    return pd.DataFrame(rows)


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Corrida piloto sintética de MindKit")
    parser.add_argument("--out", default="runs/pilot")
    parser.add_argument("--config", default=DEFAULT_CONFIG)
    parser.add_argument("--set", dest="overrides", action="append", default=[])
    parser.add_argument("--skip-run", action="store_true", help="Sólo revisa artefactos existentes")
    args = parser.parse_args(argv)

    if not args.skip_run:
        run_pipeline(args.out, args.config, args.overrides)
    table = check_thresholds(Path(args.out))
    print(table.to_string(index=False))
    print(diagnostics(Path(args.out)).to_string(index=False))
    if table["passed"].all():
        logger.info("✅ Todas las direcciones se cumplen")
        return 0
    logger.error("❌ %d chequeos fallaron", int((~table["passed"]).sum()))
    return 1


if __name__ == "__main__":
    sys.exit(main())
