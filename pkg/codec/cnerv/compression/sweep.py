import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence
import numpy as np
from cnerv.data import FrameDataset
from cnerv.embedding import EmbeddingGrid, encode_image
from cnerv.objective import evaluate
from cnerv.schemas import CompressionConfig
from cnerv.trainer import TrainState, frame_times, split
from .artifact import artifact_frames, compress, decode_artifact, encode_artifact

logger = logging.getLogger(__name__)


@dataclass
class SweepRow:
    bits_model: int
    bits_embed: int
    prune_ratio: float
    psnr: float
    ms_ssim: float
    embedding_bpp: float
    total_bpp: float


def frame_embeddings(state: TrainState, dataset: FrameDataset, frame_ids: Sequence[int]) -> List[EmbeddingGrid]:
    """Encoder output of the given frames (empty for index-based models)."""
    if state.config.kind != "cnerv":
        return []
    params = state.params
    return [
        encode_image(
            dataset[i], state.config.cae, params["encoder.reducer.weight"], params["encoder.reducer.bias"],
            frame_id=i,
        )
        for i in frame_ids
    ]


def evaluate_compressed(
    state: TrainState,
    dataset: FrameDataset,
    cfg: CompressionConfig,
    frame_ids: Optional[Sequence[int]] = None
) -> SweepRow:
    """Compress, serialize, parse and decode; metrics are measured on the decoded frames."""
    ids = list(frame_ids) if frame_ids is not None else split(len(dataset), state.split_spec).unseen
    times = frame_times(len(dataset), state.split_spec)
    artifact = compress(
        state.params,
        frame_embeddings(state, dataset, ids),
        cfg,
        masks=state.masks,
        frame_ids=ids,
        frame_times=[times[i] for i in ids],
        split_digest=state.split_spec.digest(),
        dataset_digest=state.dataset_digest,
    )
    data, summary = encode_artifact(artifact)
    frames = artifact_frames(decode_artifact(data))
    metrics = [evaluate(frames[i], dataset[i], state.loss_cfg) for i in ids]
    row = SweepRow(
        bits_model=cfg.bits_model,
        bits_embed=cfg.bits_embed,
        prune_ratio=cfg.prune_ratio,
        psnr=float(np.mean([m.psnr for m in metrics])),
        ms_ssim=float(np.mean([m.ms_ssim for m in metrics])),
        embedding_bpp=summary.embedding_bpp,
        total_bpp=summary.total_bpp,
    )
    logger.info(
        "bits_model=%d bits_embed=%d: PSNR %.2f dB, %.4f bpp embeddings, %.4f bpp total",
        row.bits_model, row.bits_embed, row.psnr, row.embedding_bpp, row.total_bpp
    )
    return row


def embedding_bit_sweep(
    state: TrainState,
    dataset: FrameDataset,
    bits: Sequence[int] = (32, 8, 6, 4, 2, 1),
    base: CompressionConfig = CompressionConfig(bits_model=8),
    frame_ids: Optional[Sequence[int]] = None
) -> List[SweepRow]:
    """Decoded quality of the unseen frames with the model at `base.bits_model` and embeddings at each width."""
    return [evaluate_compressed(state, dataset, base.copy(update={"bits_embed": b}), frame_ids) for b in bits]


def model_bit_sweep(
    state: TrainState,
    dataset: FrameDataset,
    bits: Sequence[int] = (32, 8, 6, 4, 2, 1),
    base: CompressionConfig = CompressionConfig(bits_embed=32),
    frame_ids: Optional[Sequence[int]] = None
) -> List[SweepRow]:
    return [evaluate_compressed(state, dataset, base.copy(update={"bits_model": b}), frame_ids) for b in bits]
