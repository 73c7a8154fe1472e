import math
from cnerv.compression import embedding_bit_sweep, evaluate_compressed, model_bit_sweep
from cnerv.data import FrameDataset
from cnerv.schemas import CompressionConfig
from cnerv.trainer import TrainState


def test_embedding_bit_sweep(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Fewer embedding bits give fewer embedding bytes at finite quality."""
    rows = embedding_bit_sweep(cnerv_state, video, bits=(32, 8, 6))
    assert [r.bits_embed for r in rows] == [32, 8, 6], "One row per width"
    assert all(r.bits_model == 8 for r in rows), "Model width from the base config"
    for r in rows:
        assert math.isfinite(r.psnr) and 0.0 <= r.ms_ssim <= 1.0, "Measured on decoded frames"
        assert r.total_bpp > r.embedding_bpp > 0.0, "Model bytes are part of the total"
    assert rows[0].embedding_bpp > rows[1].embedding_bpp, "8-bit codes are smaller than 32-bit ones"


def test_model_bit_sweep(nerv_state: TrainState, video: FrameDataset) -> None:
    """Index-based models carry no embedding bytes."""
    rows = model_bit_sweep(nerv_state, video, bits=(8, 4))
    assert [r.bits_model for r in rows] == [8, 4], "One row per width"
    for r in rows:
        assert r.embedding_bpp == 0.0, "No embeddings"
        assert math.isfinite(r.psnr), "Decoded frames"
    assert rows[0].total_bpp > rows[1].total_bpp, "Narrower codes take fewer bytes"


def test_evaluate_compressed_frame_list(cnerv_state: TrainState, video: FrameDataset) -> None:
    """An explicit frame list replaces the unseen split."""
    row = evaluate_compressed(cnerv_state, video, CompressionConfig(prune_ratio=0.2), frame_ids=[0])
    assert row.prune_ratio == 0.2, "Pruning recorded"
    assert math.isfinite(row.psnr), "Frame decoded"
