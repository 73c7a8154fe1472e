import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Sequence
import numpy as np
from PIL import Image
from cnerv.core.errors import InterpolationError, ModelKindError, ShapeError
from cnerv.data import FrameDataset
from cnerv.embedding import EmbeddingGrid, encode_image
from cnerv.models import cnerv_forward, nerv_forward
from cnerv.objective import evaluate, loss, psnr
from cnerv.schemas import OptimConfig
from cnerv.tensor import GradTape, Tensor
from .optim import Adam
from .split import frame_times, split
from .train import TrainState

logger = logging.getLogger(__name__)


@dataclass
class EncodedFrame:
    frame_id: int
    embedding: EmbeddingGrid
    image: np.ndarray
    psnr: float
    ms_ssim: float
    seconds: float


@dataclass
class InterpolationResult:
    frame_id: int
    image: np.ndarray
    psnr: float
    psnr_true: float
    psnr_pixel: float


@dataclass
class FinetuneResult:
    frame_id: int
    steps: int
    seconds: float
    psnr: float
    reached: bool


def _require_cnerv(state: TrainState, what: str) -> None:
    if state.config.kind != "cnerv":
        raise ModelKindError(f"NeRV requires fine-tuning to encode unseen frames ({what})")


def encode_unseen(
    state: TrainState,
    dataset: FrameDataset,
    frame_ids: Optional[Sequence[int]] = None
) -> List[EncodedFrame]:
    """Encode frames with the frozen encoder and decode them in one forward pass each.
    :param frame_ids: defaults to the unseen split
    """
    _require_cnerv(state, "encode_unseen")
    params = state.params
    ids = list(frame_ids) if frame_ids is not None else split(len(dataset), state.split_spec).unseen
    results = []
    for i in ids:
        target = dataset[i]
        started = time.perf_counter()
        embedding = encode_image(
            target, state.config.cae, params["encoder.reducer.weight"], params["encoder.reducer.bias"], frame_id=i
        )
        image = cnerv_forward(embedding, params).data.copy()
        seconds = time.perf_counter() - started
        metrics = evaluate(image, target, state.loss_cfg)
        logger.info("Encoded frame %d in %.4f s: PSNR %.2f dB", i, seconds, metrics.psnr)
        results.append(EncodedFrame(i, embedding, image, metrics.psnr, metrics.ms_ssim, seconds))
    return results


def interpolate_embedding(state: TrainState, dataset: FrameDataset, frame_id: int) -> InterpolationResult:
    """Decode the mean of the embeddings of the two seen neighbors of an unseen frame.
    Reports it next to the PSNR of the frame's own embedding and of pixel-space interpolation.
    """
    _require_cnerv(state, "interpolate_embedding")
    parts = split(len(dataset), state.split_spec)
    if frame_id not in parts.unseen:
        raise InterpolationError(f"frame {frame_id} is not an unseen frame")
    for neighbor in (frame_id - 1, frame_id + 1):
        if neighbor not in parts.seen:
            raise InterpolationError(f"frame {frame_id} has no seen neighbor {neighbor}")
    params = state.params
    cfg = state.config.cae

    def embed(i: int) -> Tensor:
        grid = encode_image(dataset[i], cfg, params["encoder.reducer.weight"], params["encoder.reducer.bias"])
        return grid.values

    mixed = Tensor(
        0.5 * (embed(frame_id - 1).data + embed(frame_id + 1).data), dtype=params["encoder.reducer.weight"].dtype
    )
    target = dataset[frame_id]
    image = np.clip(cnerv_forward(mixed, params).data, 0.0, 1.0)
    true_image = np.clip(cnerv_forward(embed(frame_id), params).data, 0.0, 1.0)
    pixel = 0.5 * (dataset[frame_id - 1] + dataset[frame_id + 1])
    return InterpolationResult(
        frame_id=frame_id,
        image=image,
        psnr=psnr(image, target),
        psnr_true=psnr(true_image, target),
        psnr_pixel=psnr(pixel, target),
    )


def interpolate_all(state: TrainState, dataset: FrameDataset) -> List[InterpolationResult]:
    """Interpolation results for every unseen frame whose two neighbors are seen."""
    results = []
    for frame_id in split(len(dataset), state.split_spec).unseen:
        try:
            results.append(interpolate_embedding(state, dataset, frame_id))
        except InterpolationError as e:
            logger.warning("Skipping interpolation of frame %d: %s", frame_id, e)
    return results


def finetune_unseen(
    state: TrainState,
    dataset: FrameDataset,
    frame_id: int,
    target_psnr: float,
    max_steps: int = 500,
    check_every: int = 10
) -> FinetuneResult:
    """Fine-tune a copy of a NeRV model on one frame (at its true index) until it reaches `target_psnr`.
    The trained state is left untouched.
    """
    if state.config.kind != "nerv":
        raise ModelKindError("CNeRV encodes unseen frames in a single forward pass, nothing to fine-tune")
    params = state.params.copy()
    cfg = OptimConfig(lr=state.optim.lr, beta1=state.optim.beta1, beta2=state.optim.beta2, eps=state.optim.eps)
    adam = Adam(cfg, params)
    t = frame_times(len(dataset), state.split_spec)[frame_id]
    target = dataset[frame_id].astype(params["decoder.head.weight"].dtype)
    started = time.perf_counter()
    reached = psnr(np.clip(nerv_forward(t, params).data, 0.0, 1.0), target)
    steps = 0
    while reached < target_psnr and steps < max_steps:
        with GradTape() as tape:
            value = loss(nerv_forward(t, params), target, state.loss_cfg)
        tape.backward(value)
        adam.step(params, cfg.lr)
        params.zero_grad()
        steps += 1
        if steps % check_every == 0 or steps == max_steps:
            reached = psnr(np.clip(nerv_forward(t, params).data, 0.0, 1.0), target)
    seconds = time.perf_counter() - started
    logger.info("Fine-tuned NeRV on frame %d: %d steps, %.2f s, PSNR %.2f dB", frame_id, steps, seconds, reached)
    return FinetuneResult(frame_id, steps, seconds, reached, reached >= target_psnr)


def bicubic_baseline_psnr(frame: np.ndarray, factor: int = 4) -> float:
    """PSNR of a bicubic downsample-then-upsample round trip of a (C, H, W) frame."""
    c, h, w = frame.shape
    if h % factor or w % factor:
        raise ShapeError(f"bicubic baseline: {h}x{w} is not divisible by {factor}")
    channels = []
    for plane in frame.astype(np.float32):
        small = Image.fromarray(plane, mode="F").resize((w // factor, h // factor), Image.BICUBIC)
        channels.append(np.asarray(small.resize((w, h), Image.BICUBIC), dtype=np.float64))
    restored = np.clip(np.stack(channels), 0.0, 1.0)
    return psnr(restored, frame)
