import json
from pathlib import Path
from typing import Any, Dict
import pytest
from cnerv import store
from cnerv.cli.deps import STATUS_FAILED, STATUS_OK, STATUS_USAGE
from cnerv.main import main
from cnerv.schemas import ModelConfig
from cnerv.tests.utils import create_frame_files, random_image


def write_config(path: Path, model: ModelConfig, **sections: Any) -> str:
    document: Dict[str, Any] = {
        "model": json.loads(model.json()),
        "data": {"synth": {"kind": "bouncing-rect", "n": 10, "H": 16, "W": 32}},
        "optim": {"epochs": 1, "eval_every": 1},
        "precision": "double",
    }
    document.update(sections)
    path.write_text(json.dumps(document))
    return str(path)


@pytest.fixture(scope="module")
def trained_run(tmp_path_factory: pytest.TempPathFactory, cnerv_config: ModelConfig) -> Dict[str, str]:
    """Config file and output directory of one CLI training run."""
    root = tmp_path_factory.mktemp("run")
    config = write_config(root / "config.json", cnerv_config, sweep={"bits_embed": [8]})
    out_dir = root / "train"
    status = main(["train", "--config", config, "--out-dir", str(out_dir)])
    assert status == STATUS_OK, "Training succeeds"
    return {"config": config, "root": str(root), "checkpoint": str(out_dir / "checkpoint.cnrv")}


def test_train_outputs(trained_run: Dict[str, str]) -> None:
    """Training writes the checkpoint, the history and a summary."""
    out_dir = Path(trained_run["checkpoint"]).parent
    assert (out_dir / "run_config.json").is_file(), "Resolved configuration is kept"
    summary = store.report.get(out_dir / "train.csv")
    assert summary is not None and summary[0]["kind"] == "cnerv", "Summary row"
    assert summary[0]["steps"] == "8", "One epoch over the 8 seen frames"
    history = store.report.get(out_dir / "history.csv")
    assert history is not None and {row["split"] for row in history} == {"seen", "unseen"}, "Both splits"
    checkpoint = store.checkpoint.get(trained_run["checkpoint"])
    assert checkpoint is not None and checkpoint.step == 8, "Checkpoint of the final step"


def test_compress_decode_decompress(trained_run: Dict[str, str]) -> None:
    """The compressed artifact decodes every frame and exposes its parameters."""
    root = Path(trained_run["root"])
    status = main([
        "compress", "--config", trained_run["config"], "--checkpoint", trained_run["checkpoint"],
        "--bits-model", "8", "--bits-embed", "6", "--out-dir", str(root / "compress"),
    ])
    assert status == STATUS_OK, "Compression succeeds"
    summary = store.report.get(root / "compress" / "compress.csv")
    assert summary is not None and summary[0]["bits_embed"] == "6", "Flag overrides the config"
    assert int(summary[0]["total_bytes"]) == (root / "compress" / "artifact.cnrv").stat().st_size, "Sizes"
    frames = store.report.get(root / "compress" / "frames.csv")
    assert frames is not None and len(frames) == 10, "One row per frame"

    artifact = str(root / "compress" / "artifact.cnrv")
    assert main(["decode", "--artifact", artifact, "--out-dir", str(root / "decode")]) == STATUS_OK, "Decoded"
    assert len(list((root / "decode" / "frames").glob("*.png"))) == 10, "Every frame written"

    assert main(["decompress", "--artifact", artifact, "--out-dir", str(root / "raw")]) == STATUS_OK, "Parsed"
    parameters = store.report.get(root / "raw" / "parameters.csv")
    assert parameters is not None and parameters[0]["name"] == "encoder.reducer.weight", "Parameter order"
    table = store.embedding_table.get(root / "raw" / "embeddings.cnem")
    assert table is not None and table.frame_ids == list(range(10)), "Embeddings of every frame"


def test_encode_embedding_only(trained_run: Dict[str, str]) -> None:
    """Embedding-only artifacts decode with the model they were encoded with."""
    root = Path(trained_run["root"])
    status = main([
        "encode", "--config", trained_run["config"], "--checkpoint", trained_run["checkpoint"],
        "--out-dir", str(root / "encode"),
    ])
    assert status == STATUS_OK, "Encoding succeeds"
    rows = store.report.get(root / "encode" / "encode.csv")
    assert rows is not None and [row["frame_id"] for row in rows] == ["4", "9"], "Unseen frames"
    embeddings = str(root / "encode" / "embeddings.cnrv")
    out_dir = str(root / "encoded_frames")
    assert main(["decode", "--artifact", embeddings, "--out-dir", out_dir]) == STATUS_FAILED, "Needs a model"
    status = main([
        "decode", "--artifact", embeddings, "--model-file", trained_run["checkpoint"], "--out-dir", out_dir,
    ])
    assert status == STATUS_OK, "Decodes with the checkpoint"
    assert sorted(p.name for p in (root / "encoded_frames" / "frames").iterdir()) == [
        "frame_00004.png", "frame_00009.png"
    ], "Unseen frames written"


def test_interpolate_and_analyze(trained_run: Dict[str, str]) -> None:
    """Interpolation covers frame 4; a model compared with itself has CKA 1."""
    root = Path(trained_run["root"])
    status = main([
        "interpolate", "--config", trained_run["config"], "--checkpoint", trained_run["checkpoint"],
        "--out-dir", str(root / "interpolate"),
    ])
    assert status == STATUS_OK, "Interpolation succeeds"
    rows = store.report.get(root / "interpolate" / "interpolate.csv")
    assert rows is not None and [row["frame_id"] for row in rows] == ["4"], "Eligible frames"

    checkpoint = trained_run["checkpoint"]
    status = main([
        "analyze", "--config", trained_run["config"], "--checkpoint", f"a={checkpoint}",
        "--checkpoint", f"b={checkpoint}", "--out-dir", str(root / "analyze"),
    ])
    assert status == STATUS_OK, "Analysis succeeds"
    cka = store.report.get(root / "analyze" / "cka.csv")
    assert cka is not None and float(cka[0]["b"]) == pytest.approx(1.0), "Same embeddings"
    assert (root / "analyze" / "embeddings_a.cnem").is_file(), "Embedding table per model"
    status = main([
        "analyze", "--config", trained_run["config"], "--checkpoint", checkpoint, "--out-dir", str(root / "bad"),
    ])
    assert status == STATUS_USAGE, "NAME=PATH is required"


def test_sweep_of_checkpoint(trained_run: Dict[str, str]) -> None:
    """A checkpoint sweep reports one row per embedding width."""
    root = Path(trained_run["root"])
    status = main([
        "sweep", "--config", trained_run["config"], "--checkpoint", trained_run["checkpoint"],
        "--out-dir", str(root / "sweep"),
    ])
    assert status == STATUS_OK, "Sweep succeeds"
    rows = store.report.get(root / "sweep" / "sweep.csv")
    assert rows is not None and [row["bits_embed"] for row in rows] == ["8"], "Configured widths"


def test_metrics_of_identical_frames(tmp_path: Path) -> None:
    """Identical directories give infinite PSNR and unit MS-SSIM."""
    create_frame_files(tmp_path / "frames", [random_image() for _ in range(2)])
    frames = str(tmp_path / "frames")
    status = main(["metrics", "--pred", frames, "--ref", frames, "--out-dir", str(tmp_path / "out")])
    assert status == STATUS_OK, "Metrics succeed"
    rows = store.report.get(tmp_path / "out" / "metrics.csv")
    assert rows is not None and [row["psnr"] for row in rows] == ["inf", "inf"], "Infinite PSNR"
    assert [float(row["ms_ssim"]) for row in rows] == [1.0, 1.0], "Unit MS-SSIM"


def test_usage_errors(tmp_path: Path, nerv_config: ModelConfig) -> None:
    """Contradicting flags and unreadable configs are usage errors, missing inputs are failures."""
    config = write_config(tmp_path / "nerv.json", nerv_config)
    out_dir = str(tmp_path / "out")
    assert main(["train", "--config", config, "--model", "cnerv", "--out-dir", out_dir]) == STATUS_USAGE, "Kind"
    missing = str(tmp_path / "missing.json")
    assert main(["train", "--config", missing, "--out-dir", out_dir]) == STATUS_USAGE, "Unreadable config"
    status = main([
        "compress", "--config", config, "--checkpoint", str(tmp_path / "none.cnrv"), "--out-dir", out_dir,
    ])
    assert status == STATUS_FAILED, "Missing checkpoint"
    with pytest.raises(SystemExit) as error:
        main(["unknown"])
    assert error.value.code == STATUS_USAGE, "Unknown command"
