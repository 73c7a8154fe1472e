import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional
from pydantic import ValidationError
from cnerv.compression import CompressedArtifact, decompress_model
from cnerv.compression.artifact import FLAG_STATE, read_preamble
from cnerv.compression.bitstream import Reader
from cnerv.core.config import settings
from cnerv.core.errors import CNeRVError
from cnerv.data import FrameDataset, load_frames, preprocess, synth_toy_video
from cnerv.models import ModelParams, nerv_baseline
from cnerv.schemas import ModelConfig, RunConfig
from cnerv.store import artifact as stored_artifact
from cnerv.store import checkpoint as stored_checkpoint
from cnerv.store import report
from cnerv.trainer import TrainState

logger = logging.getLogger(__name__)

STATUS_OK = 0
STATUS_FAILED = 1
STATUS_USAGE = 2
STATUS_UNEXPECTED = 3


class CommandError(Exception):
    """Failure of a command with the exit status it maps to."""

    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


def add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="run configuration document (JSON)")
    parser.add_argument("--seed", type=int, help="seed of model initialization, shuffling and synthetic data")
    parser.add_argument("--out-dir", help="directory receiving reports, frames and containers")
    parser.add_argument("--split-period", type=int, help="hold out one frame in every N")
    parser.add_argument("--split-phase", type=int, help="residue of the held out frames")
    parser.add_argument(
        "--shuffle-index", action="store_true", default=None, help="shuffle the frame index of NeRV"
    )
    parser.add_argument("--bits-model", type=int, help="quantization width of the model parameters")
    parser.add_argument("--bits-embed", type=int, help="quantization width of the frame embeddings")
    parser.add_argument("--prune-ratio", type=float, help="fraction of weights removed before quantization")
    parser.add_argument("--model", choices=["cnerv", "nerv"], help="model kind (NeRV is budget matched to CNeRV)")


def _overrides(args: argparse.Namespace) -> Dict[str, Dict[str, Any]]:
    flags = {
        ("split", "period"): args.split_period,
        ("split", "phase"): args.split_phase,
        ("split", "shuffle"): args.shuffle_index,
        ("compression", "bits_model"): args.bits_model,
        ("compression", "bits_embed"): args.bits_embed,
        ("compression", "prune_ratio"): args.prune_ratio,
    }
    if args.seed is not None:
        flags.update({
            ("model", "seed"): args.seed,
            ("split", "seed"): args.seed,
            ("optim", "seed"): args.seed,
        })
    sections: Dict[str, Dict[str, Any]] = {}
    for (section, key), value in flags.items():
        if value is not None:
            sections.setdefault(section, {})[key] = value
    return sections


def get_config(args: argparse.Namespace) -> RunConfig:
    """Run configuration from `--config` (defaults otherwise) with flag overrides applied."""
    document: Dict[str, Any] = {}
    if args.config:
        try:
            document = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as e:
            raise CommandError(STATUS_USAGE, "Unable to read the configuration: %s" % str(e))
    try:
        config = RunConfig.parse_obj(document)
        if args.model == "nerv" and config.model.kind == "cnerv":
            config = config.copy(update={"model": nerv_baseline(config.model)})
        elif args.model == "cnerv" and config.model.kind == "nerv":
            raise CommandError(STATUS_USAGE, "--model cnerv conflicts with the NeRV model of the configuration")
        merged = json.loads(config.json())
        for section, values in _overrides(args).items():
            merged[section].update(values)
        if args.seed is not None and merged["data"].get("synth"):
            merged["data"]["synth"]["seed"] = args.seed
        return RunConfig.parse_obj(merged)
    except (ValidationError, CNeRVError) as e:
        raise CommandError(STATUS_USAGE, "Invalid configuration: %s" % str(e))


def get_out_dir(args: argparse.Namespace) -> Path:
    out_dir = Path(args.out_dir or settings.DEFAULT_OUT_DIR)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir


def log_config(config: RunConfig, out_dir: Path) -> None:
    """Log the resolved configuration verbatim and keep a copy next to the reports."""
    document = config.json(sort_keys=True)  # type: ignore
    logger.info("Resolved configuration: %s", document)
    (out_dir / "run_config.json").write_text(document + "\n")


def get_dataset(config: RunConfig, model: Optional[ModelConfig] = None) -> FrameDataset:
    """Frames of the run; their size must fit `model` (the configured model by default)."""
    data = config.data
    if data.frames_dir:
        dataset = load_frames(data.frames_dir)
    else:
        synth = data.synth
        dataset = synth_toy_video(synth.kind, synth.n, synth.H, synth.W, seed=synth.seed, C=synth.C)
    if data.crop is not None or data.downsample != 1:
        dataset = preprocess(dataset, crop=data.crop, downsample=data.downsample)
    c, h, w = dataset.shape
    model = model or config.model
    if (c, h, w) != (model.C, model.H, model.W):
        raise CommandError(
            STATUS_USAGE,
            f"Frames are {c}x{h}x{w} but the model expects {model.C}x{model.H}x{model.W}"
        )
    return dataset


def write_report(out_dir: Path, name: str, rows: Any) -> Path:
    return report.create(out_dir / name, list(rows))


def check_kind(args: argparse.Namespace, kind: str) -> None:
    """A stored model decides the kind; a contradicting `--model` flag is a usage error."""
    if args.model is not None and args.model != kind:
        raise CommandError(STATUS_USAGE, f"--model {args.model} conflicts with the stored {kind} model")


def load_checkpoint(path: str) -> TrainState:
    try:
        state = stored_checkpoint.get(path)
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to read the checkpoint %s: %s" % (path, str(e)))
    if state is None:
        raise CommandError(STATUS_FAILED, f"Checkpoint {path} is not found")
    return state


def load_artifact(path: str) -> CompressedArtifact:
    try:
        artifact = stored_artifact.get(path)
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to read the artifact %s: %s" % (path, str(e)))
    if artifact is None:
        raise CommandError(STATUS_FAILED, f"Artifact {path} is not found")
    return artifact


def load_params(path: str) -> ModelParams:
    """Model parameters from a training checkpoint or from a compressed artifact carrying a model."""
    try:
        flags, _ = read_preamble(Reader(Path(path).read_bytes()))
    except FileNotFoundError:
        raise CommandError(STATUS_FAILED, f"Model {path} is not found")
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to read the model %s: %s" % (path, str(e)))
    if flags & FLAG_STATE:
        return load_checkpoint(path).params
    artifact = load_artifact(path)
    if not artifact.has_model:
        raise CommandError(STATUS_FAILED, f"Artifact {path} carries no model")
    return decompress_model(artifact)
