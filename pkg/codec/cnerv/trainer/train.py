import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import numpy as np
from cnerv.core.errors import NonFiniteError, TrainingDivergedError
from cnerv.data import FrameDataset
from cnerv.embedding import encode_image, raw_embedding
from cnerv.models import ModelParams, cnerv_forward, init, nerv_forward
from cnerv.objective import evaluate, loss
from cnerv.schemas import LossConfig, ModelConfig, OptimConfig, SplitSpec
from cnerv.tensor import GradTape, Tensor
from .optim import Adam, learning_rate
from .split import Split, frame_times, split

logger = logging.getLogger(__name__)

SPLITS = ("seen", "unseen")


class HistoryRow(NamedTuple):
    step: int
    split: str
    frame_id: int
    psnr: float
    ms_ssim: float
    loss: float


@dataclass
class TrainState:
    """Everything needed to continue a run exactly where it stopped."""
    params: ModelParams
    optim: OptimConfig
    loss_cfg: LossConfig
    split_spec: SplitSpec
    total_steps: int
    rng_state: Dict[str, Any]
    step: int = 0
    epoch: int = 0
    adam_t: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    best_seen_psnr: float = -math.inf
    best_unseen_psnr: float = -math.inf
    history: List[HistoryRow] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)
    masks: Optional[Dict[str, np.ndarray]] = None
    dataset_digest: str = ""

    @property
    def config(self) -> ModelConfig:
        return self.params.config

    @property
    def schedule_position(self) -> float:
        return self.step / self.total_steps

    def split_psnr(self, split_name: str) -> List[Tuple[int, float]]:
        """(step, mean PSNR) of every evaluation of one split, in step order."""
        by_step: Dict[int, List[float]] = {}
        for row in self.history:
            if row.split == split_name:
                by_step.setdefault(row.step, []).append(row.psnr)
        return [(step, float(np.mean(values))) for step, values in sorted(by_step.items())]


class FrameInputs:
    """Per-frame model inputs: raw block embeddings for CNeRV, normalized indices for NeRV."""

    def __init__(self, config: ModelConfig, dataset: FrameDataset, spec: SplitSpec):
        self.kind = config.kind
        self.times = frame_times(len(dataset), spec)
        self.raws: Dict[int, np.ndarray] = {}
        if config.kind == "cnerv":
            self.raws = {frame.id: raw_embedding(frame.data, config.cae) for frame in dataset.frames}


def predict(params: ModelParams, image: np.ndarray, t: float, raw: Optional[np.ndarray] = None) -> Tensor:
    """Reconstruction of one frame: content embedding for CNeRV, index t for NeRV."""
    config = params.config
    if config.kind == "cnerv":
        embedding = encode_image(
            image, config.cae, params["encoder.reducer.weight"], params["encoder.reducer.bias"], raw=raw
        )
        return cnerv_forward(embedding, params)
    return nerv_forward(t, params)


def evaluate_frames(
    params: ModelParams,
    dataset: FrameDataset,
    frame_ids: Sequence[int],
    inputs: FrameInputs,
    loss_cfg: LossConfig,
    step: int,
    split_name: str
) -> List[HistoryRow]:
    rows = []
    for i in frame_ids:
        target = dataset[i]
        prediction = predict(params, target, inputs.times[i], inputs.raws.get(i))
        value = loss(prediction, target.astype(prediction.dtype), loss_cfg).item()
        metrics = evaluate(prediction, target, loss_cfg)
        rows.append(HistoryRow(step, split_name, i, metrics.psnr, metrics.ms_ssim, value))
    return rows


def total_steps(n_seen: int, cfg: OptimConfig) -> int:
    return cfg.max_steps or cfg.epochs * n_seen


def start(
    config: ModelConfig,
    dataset: FrameDataset,
    spec: SplitSpec = SplitSpec(),
    optim: OptimConfig = OptimConfig(),
    loss_cfg: LossConfig = LossConfig(),
    params: Optional[ModelParams] = None,
    masks: Optional[Mapping[str, np.ndarray]] = None
) -> TrainState:
    """Fresh state: initialized (or given) parameters and zero optimizer moments."""
    parts = split(len(dataset), spec)
    params = params.copy() if params is not None else init(config)
    adam = Adam(optim, params)
    rng = np.random.Generator(np.random.PCG64(optim.seed))
    return TrainState(
        params=params,
        optim=optim,
        loss_cfg=loss_cfg,
        split_spec=spec,
        total_steps=total_steps(len(parts.seen), optim),
        rng_state=rng.bit_generator.state,
        m=adam.m,
        v=adam.v,
        masks={name: np.asarray(mask, dtype=bool) for name, mask in masks.items()} if masks else None,
        dataset_digest=dataset.digest,
    )


def _record_evaluation(state: TrainState, dataset: FrameDataset, parts: Split, inputs: FrameInputs) -> None:
    for split_name, ids in zip(SPLITS, parts):
        if not ids:
            continue
        try:
            rows = evaluate_frames(state.params, dataset, ids, inputs, state.loss_cfg, state.step, split_name)
        except NonFiniteError as e:
            raise TrainingDivergedError(state.step, str(e))
        state.history.extend(rows)
        mean_psnr = float(np.mean([row.psnr for row in rows]))
        if split_name == "seen":
            state.best_seen_psnr = max(state.best_seen_psnr, mean_psnr)
        else:
            state.best_unseen_psnr = max(state.best_unseen_psnr, mean_psnr)
        logger.info("step %d epoch %d: %s PSNR %.2f dB", state.step, state.epoch, split_name, mean_psnr)


def train(
    config: ModelConfig,
    dataset: FrameDataset,
    spec: SplitSpec = SplitSpec(),
    optim: OptimConfig = OptimConfig(),
    loss_cfg: LossConfig = LossConfig(),
    params: Optional[ModelParams] = None,
    masks: Optional[Mapping[str, np.ndarray]] = None,
    state: Optional[TrainState] = None,
    stop_at: Optional[int] = None
) -> TrainState:
    """Fit the model on the seen frames, evaluating both splits every `eval_every` epochs.

    :param params: starting parameters (fine-tuning); a copy is trained
    :param masks: survivor bitmaps of a pruned model, kept zero throughout
    :param state: resume this state instead of starting over
    :param stop_at: return once this many steps are done (the state can be resumed)
    """
    if state is None:
        state = start(config, dataset, spec, optim, loss_cfg, params=params, masks=masks)
    parts = split(len(dataset), state.split_spec)
    inputs = FrameInputs(state.config, dataset, state.split_spec)
    adam = Adam(state.optim, state.params)
    adam.load(state.adam_t, state.m, state.v)
    n_seen = len(parts.seen)
    rng = np.random.Generator(np.random.PCG64())
    rng.bit_generator.state = state.rng_state
    order = rng.permutation(parts.seen)
    last = state.total_steps if stop_at is None else min(stop_at, state.total_steps)
    logger.info(
        "Training %s (%d parameters) on %d seen frames, steps %d..%d of %d",
        state.config.kind, state.params.count(), n_seen, state.step, last, state.total_steps
    )
    while state.step < last:
        position = state.step - state.epoch * n_seen
        if position == n_seen:
            state.epoch += 1
            state.rng_state = rng.bit_generator.state
            order = rng.permutation(parts.seen)
            position = 0
        i = int(order[position])
        target = dataset[i].astype(state.params["decoder.head.weight"].dtype)
        try:
            with GradTape() as tape:
                prediction = predict(state.params, target, inputs.times[i], inputs.raws.get(i))
                value = loss(prediction, target, state.loss_cfg)
            tape.backward(value)
        except NonFiniteError as e:
            raise TrainingDivergedError(state.step, str(e))
        for name, p in state.params.items():
            if p.grad is not None and not np.all(np.isfinite(p.grad)):
                raise TrainingDivergedError(state.step, f"gradient of {name} is not finite")
        adam.step(state.params, learning_rate(state.step, state.total_steps, state.optim), state.masks)
        state.params.zero_grad()
        state.step_losses.append(value.item())
        logger.debug("step %d frame %d loss %.6f", state.step, i, value.item())
        state.step += 1
        state.adam_t = adam.t
        epoch_done = position + 1 == n_seen
        if (epoch_done and (state.epoch + 1) % state.optim.eval_every == 0) or state.step == state.total_steps:
            _record_evaluation(state, dataset, parts, inputs)
    state.m, state.v = adam.m, adam.v
    return state
