"""
Comandos de la CLI: cada uno lee la configuración, corre una etapa y deja
sus artefactos (más config.json y run_log.json) bajo --out.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from Functions.Analysis import (
    cmg_motion_ablation,
    guidance_ablation,
    importance_auc,
    read_roi_labels,
    roi_importance_table,
    shuffle_test,
    variant_ablation,
    voxel_importance,
    write_importance,
)
from Functions.Config import RunConfig
from Functions.DataIO import (
    SyntheticConfig,
    generate_synthetic_dataset,
    prepare_dataset,
    read_dataset,
    read_prepared,
    write_json,
    write_prepared,
)
from Functions.Encoders import get_backend
from Functions.Evaluation import (
    bootstrap_aggregate,
    evaluate_reconstructions,
    retrieval,
    retrieval_ranks,
    vifi_score,
    write_report,
)
from Functions.Generator import (
    ground_truth_reconstructions,
    parse_substitutions,
    read_reconstructions,
    reconstruct_dataset,
    write_reconstructions,
)
from Functions.MotionGenerator import load_cmg, load_perframe, save_cmg, save_perframe, train_cmg, train_perframe
from Functions.Plotting import plot_importance, plot_loss_curves, plot_metric_bars, plot_pvalue_histograms
from Functions.SemanticDecoder import decode_semantic, load_semantic, save_semantic, train_semantic
from Functions.StructureDecoder import load_structure, save_structure, train_structure
from Functions.Training import FLOAT_FORMAT
from .artifacts import ArtifactLayout, require, write_run_log

logger = logging.getLogger(__name__)

TRAIN_STAGES = ("semantic", "structure", "cmg", "perframe")
ANALYSES = ("shuffle", "importance", "guidance", "motion", "variants")
DEFAULT_TAG = "default"
GROUND_TRUTH_TAG = "ground_truth"

_LOADERS = {"semantic": load_semantic, "structure": load_structure, "cmg": load_cmg, "perframe": load_perframe}


def _load_state(layout: ArtifactLayout, stage: str):
    return _LOADERS[stage](require(layout.state(stage), stage))


def _prepared(layout: ArtifactLayout):
    require(layout.prepared / "preprocessing", "prepared")
    return read_prepared(layout.prepared)


def cmd_synth(config: RunConfig, layout: ArtifactLayout) -> Dict[str, Any]:
    """Genera los splits sintéticos train/test en data/."""
    embedder = get_backend("embedder", config.embedder)
    sizes = {}
    for split in ("train", "test"):
        dataset = generate_synthetic_dataset(SyntheticConfig.from_run_config(config, split), embedder,
                                             layout.data / split)
        sizes[split] = len(dataset)
    write_run_log(layout.data, config, "synth")
    return {"train": sizes["train"], "test": sizes["test"]}


def cmd_prepare(config: RunConfig, layout: ArtifactLayout) -> Dict[str, Any]:
    """Selección de voxels y z-score con estadísticas de train."""
    train = read_dataset(require(layout.data / "train", "data"))
    test = read_dataset(require(layout.data / "test", "data"))
    train, test, preparation = prepare_dataset(train, test, config.voxel_k)
    write_prepared(layout.prepared, train, test, preparation)
    write_run_log(layout.prepared, config, "prepare", inputs={"data": layout.data})
    return {"n_voxels": int(preparation.kept_indices.size)}


def cmd_train(config: RunConfig, layout: ArtifactLayout, stage: str) -> Dict[str, Any]:
    """Entrena un decodificador / generador de movimiento y guarda su estado."""
    train, _, _ = _prepared(layout)
    tokenizer = get_backend("tokenizer", config.tokenizer)
    directory = layout.state(stage)
    if stage == "semantic":
        state = train_semantic(train, config, get_backend("embedder", config.embedder),
                               get_backend("conditioner", config.conditioner))
        save_semantic(state, directory)
    elif stage == "structure":
        state = train_structure(train, config, tokenizer)
        save_structure(state, directory)
    elif stage == "cmg":
        state = train_cmg(train, tokenizer, config)
        save_cmg(state, directory)
    elif stage == "perframe":
        state = train_perframe(train, tokenizer, config)
        save_perframe(state, directory)
    else:
        raise ValueError(f"etapa desconocida {stage!r}")
    write_run_log(directory, config, f"train {stage}", inputs={"prepared": layout.prepared})
    history = state.history.to_dataframe()
    plot_loss_curves(history, layout.plots / f"loss_{stage}.png", title=stage)
    last = history.iloc[-1].to_dict() if len(history) else {}
    return {"stage": stage, "epochs": len(history), "final_train_loss": last.get("train_loss")}


def _tag_for(substitutions: Dict[str, str]) -> str:
    if not substitutions:
        return DEFAULT_TAG
    return "_".join(f"{key}-{value}" for key, value in sorted(substitutions.items()))


def cmd_reconstruct(config: RunConfig, layout: ArtifactLayout, substitute: Optional[Sequence[str]] = None,
                    tag: Optional[str] = None, ground_truth: bool = False) -> Dict[str, Any]:
    """
    Reconstruye el split de test. --ground-truth pasa los features
    verdaderos por el generador (techo de ruido).
    """
    _, test, _ = _prepared(layout)
    tokenizer = get_backend("tokenizer", config.tokenizer)
    backend = get_backend("generator", config.generator)
    substitutions = parse_substitutions(substitute)

    if ground_truth:
        tag = tag or GROUND_TRUTH_TAG
        recon = ground_truth_reconstructions(test, tokenizer, backend, config.cmg_patch, config)
        inputs = {"prepared": layout.prepared}
    else:
        tag = tag or _tag_for(substitutions)
        stages = ["semantic", "structure", "cmg"] + (["perframe"] if substitutions.get("motion") == "mlp" else [])
        states = {stage: _load_state(layout, stage) for stage in stages}
        recon = reconstruct_dataset(test, states, tokenizer, backend, config, substitutions)
        inputs = {"prepared": layout.prepared, **{stage: layout.state(stage) for stage in stages}}

    directory = layout.reconstructions(tag)
    write_reconstructions(directory, recon, {"tag": tag, "generator": config.generator})
    write_run_log(directory, config, "reconstruct", inputs=inputs, extra={"substitutions": recon.substitutions})
    return {"tag": tag, "clips": len(recon)}


def _evaluation_backends(config: RunConfig):
    return (get_backend("embedder", config.embedder), get_backend("classifier", config.classifier),
            get_backend("flow", config.flow))


def cmd_evaluate(config: RunConfig, layout: ArtifactLayout, tag: str = DEFAULT_TAG,
                 xlsx: bool = False) -> Dict[str, Any]:
    """Calcula el MetricReport de una reconstrucción."""
    _, test, _ = _prepared(layout)
    recon = read_reconstructions(require(layout.reconstructions(tag), "reconstructions"))
    embedder, classifier, flow_backend = _evaluation_backends(config)
    report = evaluate_reconstructions(test, recon.frames, recon.sample_ids, embedder, classifier,
                                      flow_backend, config)
    directory = layout.report(tag)
    write_report(report, directory, xlsx=xlsx)
    write_run_log(directory, config, "evaluate", inputs={"reconstructions": layout.reconstructions(tag)})
    plot_metric_bars(report.aggregates_frame(), layout.plots / f"metrics_{tag}.png", title=tag)
    return {"tag": tag, **{metric: values["mean"] for metric, values in report.aggregates.items()}}


def cmd_retrieve(config: RunConfig, layout: ArtifactLayout) -> Dict[str, Any]:
    """Top-k de recuperación: embedding decodificado del fMRI vs. embeddings de video del test."""
    _, test, _ = _prepared(layout)
    state = _load_state(layout, "semantic")
    embedder = get_backend("embedder", config.embedder)
    queries, _ = decode_semantic(state, test.fmri)
    candidates = embedder.embed_videos(test.frames)
    accuracies = retrieval(queries, candidates, config.retrieval_k)
    ranks = retrieval_ranks(queries, candidates)
    hits = {k: (ranks < min(k, len(candidates))).astype(np.float64) for k in accuracies}
    result = {
        "n_queries": len(queries), "n_candidates": len(candidates),
        "top_k": {str(k): value for k, value in accuracies.items()},
        "chance": {str(k): min(k, len(candidates)) / len(candidates) for k in accuracies},
        "bootstrap": {str(k): bootstrap_aggregate(values, config.n_boot, [config.seed, k]).to_dict()
                      for k, values in hits.items()},
    }
    directory = layout.report("retrieval")
    write_json(directory / "retrieval.json", result)
    write_run_log(directory, config, "retrieve", inputs={"semantic": layout.state("semantic")})
    return {"top_k": result["top_k"], "chance": result["chance"]}


def _analyze_shuffle(config: RunConfig, layout: ArtifactLayout, tag: str) -> Dict[str, Any]:
    _, test, _ = _prepared(layout)
    recon = read_reconstructions(require(layout.reconstructions(tag), "reconstructions"))
    embedder, _, flow_backend = _evaluation_backends(config)
    gt = test.frames[recon.sample_ids]
    vifi = [vifi_score(a, b, embedder) for a, b in zip(gt, recon.frames)]
    results = {metric: shuffle_test(recon.frames, gt, metric, embedder, flow_backend, config.n_shuffles,
                                    config.clip_gate, config.seed, config.shuffle_repeats, recon.sample_ids, vifi)
               for metric in ("clip_pcc", "epe")}
    directory = layout.analysis(f"shuffle_{tag}")
    write_json(directory / "shuffle.json", {metric: result.to_dict() for metric, result in results.items()})
    write_run_log(directory, config, "analyze shuffle", inputs={"reconstructions": layout.reconstructions(tag)})
    plot_pvalue_histograms({metric: result.p_mean for metric, result in results.items()},
                           layout.plots / f"shuffle_{tag}.png", title=tag)
    return {f"p_{metric}": result.overall_mean() for metric, result in results.items()}


def _analyze_importance(config: RunConfig, layout: ArtifactLayout) -> Dict[str, Any]:
    _, test, _ = _prepared(layout)
    maps = [voxel_importance(_load_state(layout, stage)) for stage in ("semantic", "structure", "cmg")]
    directory = layout.analysis("importance")
    summary: Dict[str, Any] = {}

    signal = test.ground_truth.get("signal_voxels")
    if signal is not None and 0 < len(signal) < maps[0].n_voxels:
        summary["auc"] = {importance.kind: importance_auc(importance, signal) for importance in maps}

    if config.roi_labels_path:
        labels, names = read_roi_labels(layout.resolve(config.roi_labels_path),
                                        layout.resolve(config.roi_names_path) if config.roi_names_path else None)
        table = roi_importance_table(maps, labels, names)
        directory.mkdir(parents=True, exist_ok=True)
        table.to_csv(directory / "roi_importance.csv", index=False, float_format=FLOAT_FORMAT)
        summary["rois"] = int(len(table))

    for importance in maps:
        write_importance(directory / importance.kind, importance)
        plot_importance(importance.weights, layout.plots / f"importance_{importance.kind}.png",
                        roi_means=importance.roi_means, title=importance.kind)
    write_json(directory / "summary.json", summary)
    write_run_log(directory, config, "analyze importance",
                  inputs={stage: layout.state(stage) for stage in ("semantic", "structure", "cmg")})
    return summary


def _analyze_ablation(config: RunConfig, layout: ArtifactLayout, kind: str) -> Dict[str, Any]:
    train, test, _ = _prepared(layout)
    tokenizer = get_backend("tokenizer", config.tokenizer)
    backend = get_backend("generator", config.generator)
    flow_backend = get_backend("flow", config.flow)
    inputs = {"prepared": layout.prepared}
    if kind == "variants":
        result = variant_ablation(train, tokenizer, config)
    elif kind == "guidance":
        result = guidance_ablation(train, test, tokenizer, backend, flow_backend, config)
    else:
        states = {stage: _LOADERS[stage](layout.state(stage)) for stage in ("cmg", "perframe")
                  if (layout.state(stage) / "manifest.json").exists()}
        inputs.update({stage: layout.state(stage) for stage in states})
        result = cmg_motion_ablation(train, test, tokenizer, backend, flow_backend, config,
                                     cmg_state=states.get("cmg"), perframe_state=states.get("perframe"))
    directory = layout.analysis(kind)
    write_json(directory / f"{kind}.json", result.to_dict())
    write_run_log(directory, config, f"analyze {kind}", inputs=inputs)
    if kind == "variants":
        return {f"final_loss_{arm}": loss for arm, loss in result.extra["final_train_loss"].items()}
    return {f"epe_{arm}": result.mean(arm) for arm in result.arms}


def cmd_analyze(config: RunConfig, layout: ArtifactLayout, kind: str, tag: str = DEFAULT_TAG) -> Dict[str, Any]:
    """Test de orden, mapas de importancia o ablaciones del generador de movimiento (guía, movimiento, variantes)."""
    if kind == "shuffle":
        return _analyze_shuffle(config, layout, tag)
    if kind == "importance":
        return _analyze_importance(config, layout)
    if kind in ("guidance", "motion", "variants"):
        return _analyze_ablation(config, layout, kind)
    raise ValueError(f"análisis desconocido {kind!r}")


def summary_lines(summary: Dict[str, Any]) -> List[str]:
    """Líneas 'clave: valor' para imprimir al final de un comando."""
    lines = []
    for key, value in summary.items():
        if isinstance(value, float):
            value = f"{value:.4f}"
        lines.append(f"{key}: {value}")
    return lines
