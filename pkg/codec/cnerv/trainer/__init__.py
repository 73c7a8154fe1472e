from .experiments import (
    EncodedFrame, FinetuneResult, InterpolationResult, bicubic_baseline_psnr, encode_unseen, finetune_unseen,
    interpolate_all, interpolate_embedding
)
from .optim import Adam, learning_rate
from .split import Split, frame_times, split
from .train import FrameInputs, HistoryRow, TrainState, evaluate_frames, predict, start, train
