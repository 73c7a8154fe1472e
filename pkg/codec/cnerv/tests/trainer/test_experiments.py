import math
import numpy as np
import pytest
from pytest_mock import MockerFixture
from cnerv.core.errors import InterpolationError, ModelKindError, ShapeError
from cnerv.data import FrameDataset
from cnerv.objective import psnr
from cnerv.schemas import ModelConfig, OptimConfig, SplitSpec
from cnerv.tensor import precision
from cnerv.trainer import (
    TrainState, bicubic_baseline_psnr, encode_unseen, finetune_unseen, interpolate_all, interpolate_embedding,
    predict, start, train
)


def test_encode_unseen(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Unseen frames are encoded in one forward pass each and decode as in evaluation."""
    results = encode_unseen(cnerv_state, video)
    assert [r.frame_id for r in results] == [4, 9], "Unseen split by default"
    for r in results:
        assert r.embedding.shape == (4, 2, 4), "(L, M, N) embedding"
        assert r.image.shape == (3, 16, 32), "Decoded frame"
        assert r.seconds >= 0.0, "Wall-clock time is measured"
        expected = np.clip(predict(cnerv_state.params, video[r.frame_id], 0.0).data, 0.0, 1.0)
        assert r.psnr == psnr(expected, video[r.frame_id]), "Same reconstruction as evaluation"
    assert [r.frame_id for r in encode_unseen(cnerv_state, video, [0, 1])] == [0, 1], "Explicit frame list"


def test_encode_unseen_ignores_the_clock(
    cnerv_state: TrainState, video: FrameDataset, mocker: MockerFixture
) -> None:
    """Only the reported seconds come from the clock; embeddings and metrics do not."""
    reference = encode_unseen(cnerv_state, video)
    clock = mocker.patch("cnerv.trainer.experiments.time")
    clock.perf_counter.side_effect = [10.0, 12.5, 20.0, 20.25]
    timed = encode_unseen(cnerv_state, video)
    assert [r.seconds for r in timed] == [2.5, 0.25], "Per-frame wall-clock time"
    for expected, result in zip(reference, timed):
        assert np.array_equal(result.embedding.values.data, expected.embedding.values.data), "Same embedding"
        assert (result.psnr, result.ms_ssim) == (expected.psnr, expected.ms_ssim), "Same metrics"


def test_encode_unseen_needs_encoder(nerv_state: TrainState, video: FrameDataset) -> None:
    """Index-based models cannot encode a frame without fine-tuning."""
    with pytest.raises(ModelKindError):
        encode_unseen(nerv_state, video)


def test_finetune_unseen(nerv_state: TrainState, video: FrameDataset) -> None:
    """Fine-tuning stops at the target or the step budget and leaves the trained state alone."""
    before = nerv_state.params.copy()
    reached = finetune_unseen(nerv_state, video, 4, target_psnr=-math.inf)
    assert reached.steps == 0 and reached.reached, "Target met before the first step"
    capped = finetune_unseen(nerv_state, video, 4, target_psnr=math.inf, max_steps=3)
    assert capped.steps == 3 and not capped.reached, "Budget exhausted"
    for name in before:
        assert np.array_equal(nerv_state.params[name].data, before[name].data), "Trained parameters untouched"


def test_finetune_needs_index_model(cnerv_state: TrainState, video: FrameDataset) -> None:
    """CNeRV encodes unseen frames directly, there is nothing to fine-tune."""
    with pytest.raises(ModelKindError):
        finetune_unseen(cnerv_state, video, 4, target_psnr=30.0)


def test_interpolation_of_static_video(cnerv_config: ModelConfig, static_video: FrameDataset) -> None:
    """Neighbors of a static video share one embedding, so interpolating it changes nothing."""
    state = start(cnerv_config, static_video)
    result = interpolate_embedding(state, static_video, 4)
    assert result.psnr == result.psnr_true, "Mean of equal embeddings is the embedding itself"
    assert result.psnr_pixel == math.inf, "Mean of equal frames is the frame itself"


def test_interpolation_keeps_single_precision(cnerv_config: ModelConfig, static_video: FrameDataset) -> None:
    """A float32 model interpolates in float32 even when called outside its precision block."""
    with precision("single"):
        state = train(cnerv_config, static_video, SplitSpec(), OptimConfig(epochs=1))
    assert state.params["decoder.head.weight"].dtype == np.float32, "Single precision run"
    result = interpolate_embedding(state, static_video, 4)
    assert result.psnr == result.psnr_true, "Same decode path as the frame's own embedding"


def test_interpolation_eligibility(cnerv_state: TrainState, nerv_state: TrainState, video: FrameDataset) -> None:
    """Only unseen frames with two seen neighbors are interpolated."""
    result = interpolate_embedding(cnerv_state, video, 4)
    assert result.image.min() >= 0.0 and result.image.max() <= 1.0, "Clamped frame"
    with pytest.raises(InterpolationError):
        interpolate_embedding(cnerv_state, video, 3)
    with pytest.raises(InterpolationError):
        interpolate_embedding(cnerv_state, video, 9)
    assert [r.frame_id for r in interpolate_all(cnerv_state, video)] == [4], "Frame 9 has no right neighbor"
    with pytest.raises(ModelKindError):
        interpolate_embedding(nerv_state, video, 4)


def test_bicubic_baseline(video: FrameDataset) -> None:
    """Smooth frames survive a bicubic round trip better than sharp ones."""
    flat = np.full((3, 16, 32), 0.5)
    assert bicubic_baseline_psnr(flat) > 60.0, "A constant frame is reproduced"
    value = bicubic_baseline_psnr(video[0], factor=4)
    assert math.isfinite(value) and value > 10.0, "Finite PSNR for a real frame"
    assert bicubic_baseline_psnr(video[0], factor=2) >= value, "Milder downsampling loses less"
    with pytest.raises(ShapeError):
        bicubic_baseline_psnr(video[0], factor=3)
