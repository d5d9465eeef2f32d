import json
import os
import sys

import numpy as np
import pytest

from AppBuild import APP, commands
from AppBuild.artifacts import ArtifactLayout, require
from Functions.errors import MissingArtifactError
from conftest import TINY

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO_ROOT, "scripts"))

import pilot_run  # noqa: E402

PIPELINE = (
    ["synth"],
    ["prepare"],
    ["train", "semantic"],
    ["train", "structure"],
    ["train", "cmg"],
    ["train", "perframe"],
    ["reconstruct"],
    ["reconstruct", "--ground-truth"],
    ["reconstruct", "--substitute", "motion=mlp"],
    ["evaluate", "--xlsx"],
    ["evaluate", "--tag", "ground_truth"],
    ["retrieve"],
    ["analyze", "importance"],
    ["analyze", "shuffle", "--tag", "ground_truth"],
    ["analyze", "motion"],
    ["analyze", "variants"],
)


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for key in list(os.environ):
        if key.startswith("MINDKIT_"):
            monkeypatch.delenv(key)


@pytest.fixture(scope="module")
def tiny_env(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "tiny.env"
    path.write_text("".join(f"{key}={value}\n" for key, value in TINY.items()), encoding="utf-8")
    return str(path)


def _cli(out, tiny_env, *argv):
    return APP.main(["--out", str(out), "--config", tiny_env, *argv])


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory, tiny_env):
    out = tmp_path_factory.mktemp("run")
    codes = {" ".join(step): _cli(out, tiny_env, *step) for step in PIPELINE}
    return out, codes


class TestPipeline:
    def test_every_step_succeeds(self, pipeline_run):
        _, codes = pipeline_run
        assert {step: code for step, code in codes.items() if code != 0} == {}

    def test_artifacts_are_written(self, pipeline_run):
        out, _ = pipeline_run
        for relative in ("data/train/manifest.json", "prepared/preprocessing/manifest.json",
                         "states/semantic/manifest.json", "states/perframe/manifest.json",
                         "reconstructions/default/sample_0000/frame_00.png",
                         "reconstructions/motion-mlp/manifest.json",
                         "reports/default/report.json", "reports/default/metrics.xlsx",
                         "reports/retrieval/retrieval.json", "analysis/importance/summary.json",
                         "analysis/shuffle_ground_truth/shuffle.json", "analysis/motion/motion.json",
                         "analysis/variants/variants.json",
                         "plots/loss_semantic.png"):
            assert (out / relative).exists(), relative

    def test_run_logs_chain_config_hashes(self, pipeline_run):
        out, _ = pipeline_run
        prepared = json.loads((out / "prepared" / "run_log.json").read_text(encoding="utf-8"))
        trained = json.loads((out / "states" / "cmg" / "run_log.json").read_text(encoding="utf-8"))
        assert trained["stage"] == "train cmg"
        assert trained["inputs"]["prepared"] == prepared["config_hash"]
        assert trained["version"].startswith("mindkit-")

    def test_ground_truth_report_is_the_noise_ceiling(self, pipeline_run):
        out, _ = pipeline_run
        report = json.loads((out / "reports" / "ground_truth" / "report.json").read_text(encoding="utf-8"))
        assert report["aggregates"]["ssim"]["mean"] == pytest.approx(1.0, abs=1e-2)

    def test_importance_auc_is_reported_per_decoder(self, pipeline_run):
        out, _ = pipeline_run
        summary = json.loads((out / "analysis" / "importance" / "summary.json").read_text(encoding="utf-8"))
        assert set(summary["auc"]) == {"semantic", "structure", "motion"}

    def test_evaluation_is_reproducible(self, pipeline_run, tiny_env):
        out, _ = pipeline_run
        before = (out / "reports" / "default" / "report.json").read_bytes()
        assert _cli(out, tiny_env, "evaluate") == 0
        assert (out / "reports" / "default" / "report.json").read_bytes() == before


class TestExitCodes:
    def test_synth_is_bit_reproducible(self, tmp_path, tiny_env):
        assert _cli(tmp_path / "a", tiny_env, "synth") == 0
        assert _cli(tmp_path / "b", tiny_env, "synth") == 0
        for name in ("fmri.f4", "frames.u8", "manifest.json"):
            a = (tmp_path / "a" / "data" / "test" / name).read_bytes()
            b = (tmp_path / "b" / "data" / "test" / name).read_bytes()
            assert a == b, name

    def test_missing_artifact_exits_with_one(self, tmp_path, tiny_env):
        assert _cli(tmp_path, tiny_env, "train", "semantic") == 1

    @pytest.mark.parametrize("item", ["SEMANTIC_EPOCHS", "NOT_A_KEY=1", "CMG_PATCH=5"])
    def test_bad_overrides_exit_with_one(self, tmp_path, tiny_env, item):
        assert _cli(tmp_path, tiny_env, "--set", item, "synth") == 1

    def test_unexpected_failure_exits_with_two(self, tmp_path, tiny_env, monkeypatch):
        def boom(config, layout):
            raise RuntimeError("disco lleno")

        monkeypatch.setattr(commands, "cmd_synth", boom)
        assert _cli(tmp_path, tiny_env, "synth") == 2

    def test_overrides_win_over_the_config_file(self, tmp_path, tiny_env):
        assert _cli(tmp_path, tiny_env, "--set", "SYNTH_N_TEST=3", "synth") == 0
        manifest = json.loads((tmp_path / "data" / "test" / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["n_samples"] == 3


def test_require_names_the_producing_command(tmp_path):
    layout = ArtifactLayout(tmp_path)
    with pytest.raises(MissingArtifactError, match="train cmg"):
        require(layout.state("cmg"), "cmg")
    assert layout.resolve("/abs/data").as_posix() == "/abs/data"
    assert layout.resolve("data") == tmp_path / "data"


def test_summary_lines_format_floats():
    assert commands.summary_lines({"epe": 0.123456, "clips": 3}) == ["epe: 0.1235", "clips: 3"]


@pytest.mark.slow
def test_pilot_run_meets_every_direction_at_acceptance_scale(tmp_path):
    out = tmp_path / "pilot"
    config = os.path.join(REPO_ROOT, "configs", "pilot_acceptance.env")
    assert pilot_run.DEFAULT_CONFIG == config
    assert pilot_run.main(["--out", str(out)]) == 0
    table = pilot_run.check_thresholds(out)
    assert len(table) == 4
    assert np.isfinite(table["value"].astype(float)).all()
    assert table["passed"].all()
    assert len(pilot_run.diagnostics(out)) == 3
    manifest = json.loads((out / "data" / "train" / "manifest.json").read_text(encoding="utf-8"))
    assert (manifest["n_samples"], manifest["n_voxels"], manifest["frame_size"]) == (500, 512, [64, 64])
