import argparse
import logging
import numpy as np
from cnerv import trainer
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.compression import (
    artifact_frames, compress, decode_artifact, encode_artifact, frame_embeddings, prune
)
from cnerv.core.errors import CNeRVError
from cnerv.objective import evaluate
from cnerv.store import artifact
from cnerv.tensor import precision

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command(
    "compress",
    summary="Prune, quantize and entropy code a trained model and the embeddings of every frame",
    arguments=(argument("--checkpoint", required=True, help="trained checkpoint"),),
)
def compress_model(args: argparse.Namespace) -> None:
    """Write artifact.cnrv, compress.csv (sizes, bpp, decoded quality) and frames.csv."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    state = deps.load_checkpoint(args.checkpoint)
    deps.check_kind(args, state.config.kind)
    dataset = deps.get_dataset(config, state.config)
    cfg = config.compression
    try:
        params, masks = state.params, state.masks
        if masks is None and cfg.prune_ratio > 0.0:
            params, masks = prune(params, cfg.prune_ratio, cfg.per_layer)
            if cfg.finetune_epochs:
                optim = state.optim.copy(update={"epochs": cfg.finetune_epochs, "max_steps": None})
                with precision(config.precision):
                    tuned = trainer.train(
                        state.config, dataset, state.split_spec, optim, state.loss_cfg, params=params, masks=masks
                    )
                params = tuned.params
        state.params, state.masks = params, masks
        frame_ids = list(range(len(dataset)))
        times = trainer.frame_times(len(dataset), state.split_spec)
        compressed = compress(
            params,
            frame_embeddings(state, dataset, frame_ids),
            cfg,
            masks=masks,
            frame_ids=frame_ids,
            frame_times=[times[i] for i in frame_ids],
            split_digest=state.split_spec.digest(),
            dataset_digest=dataset.digest,
        )
        data, summary = encode_artifact(compressed)
        frames = artifact_frames(decode_artifact(data))
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to compress the model: %s" % str(e))
    artifact.create(out_dir / "artifact.cnrv", compressed)
    parts = trainer.split(len(dataset), state.split_spec)
    unseen = set(parts.unseen)
    rows = []
    for i, image in frames.items():
        metrics = evaluate(image, dataset[i], state.loss_cfg)
        rows.append({
            "frame_id": i,
            "split": "unseen" if i in unseen else "seen",
            "psnr": metrics.psnr,
            "ms_ssim": metrics.ms_ssim,
        })
    deps.write_report(out_dir, "frames.csv", rows)

    def mean(split: str, key: str) -> float:
        return float(np.mean([row[key] for row in rows if row["split"] == split]))

    deps.write_report(out_dir, "compress.csv", [{
        "bits_model": cfg.bits_model,
        "bits_embed": cfg.bits_embed,
        "prune_ratio": cfg.prune_ratio,
        "model_bytes": summary.model_bytes,
        "embedding_bytes": summary.embedding_bytes,
        "total_bytes": summary.total_bytes,
        "embedding_bpp": summary.embedding_bpp,
        "total_bpp": summary.total_bpp,
        "seen_psnr": mean("seen", "psnr"),
        "unseen_psnr": mean("unseen", "psnr"),
        "seen_ms_ssim": mean("seen", "ms_ssim"),
        "unseen_ms_ssim": mean("unseen", "ms_ssim"),
    }])
    logger.info("Compressed to %d bytes, %.4f bpp", summary.total_bytes, summary.total_bpp)
