import numpy as np
import pytest
from cnerv.compression import (
    artifact_frames, bpp, compress, decode_artifact, decode_checkpoint, decompress, decompress_embeddings,
    decompress_model, encode_artifact, encode_checkpoint, frame_embeddings
)
from cnerv.core.errors import BitstreamError, DigestMismatchError
from cnerv.data import FrameDataset
from cnerv.models import init
from cnerv.objective import psnr
from cnerv.schemas import CompressionConfig
from cnerv.trainer import TrainState


def test_bpp() -> None:
    """8 · bytes / (frames · H · W)."""
    assert bpp(1000, 10, 32, 64) == 0.390625, "1000 bytes over ten 32x64 frames"


def test_container_round_trip(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Decoding and re-encoding a container gives the same bytes."""
    ids = list(range(len(video)))
    artifact = compress(cnerv_state.params, frame_embeddings(cnerv_state, video, ids), CompressionConfig())
    data, summary = encode_artifact(artifact)
    again, _ = encode_artifact(decode_artifact(data))
    assert again == data, "Byte-identical re-encode"
    assert summary.total_bytes == len(data), "Size accounting"
    assert summary.model_bytes > 0 and summary.embedding_bytes > 0, "Both sections present"
    assert summary.total_bpp == bpp(len(data), len(video), 16, 32), "Bits per pixel over every frame"


def test_decompress_reproduces_dequantized(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Parsed parameters equal the dequantized ones; at 32 bits they are close to the originals."""
    ids = [4, 9]
    embeddings = frame_embeddings(cnerv_state, video, ids)
    artifact = compress(cnerv_state.params, embeddings, CompressionConfig(bits_model=32))
    params, decoded = decompress(decode_artifact(encode_artifact(artifact)[0]))
    direct = decompress_model(artifact)
    for name in params:
        assert np.array_equal(params[name].data, direct[name].data), "Container is lossless"
        assert np.allclose(params[name].data, cnerv_state.params[name].data, atol=1e-8), "32-bit quantization"
    assert list(decoded) == ids, "Embeddings keyed by frame id"
    frames = artifact_frames(artifact)
    for i in ids:
        assert psnr(frames[i], video[i]) > 0.0, "Decoded frames"


def test_pruned_weights_are_exact_zeros(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Bitmaps restore pruned positions as exact zeros and only survivors are coded."""
    cfg = CompressionConfig(bits_model=6, prune_ratio=0.5)
    artifact = compress(cnerv_state.params, frame_embeddings(cnerv_state, video, [0]), cfg)
    parsed = decode_artifact(encode_artifact(artifact)[0])
    params = decompress_model(parsed)
    for name in cnerv_state.params.prunable():
        bitmap = parsed.tensors[name].bitmap
        assert bitmap is not None, "Weights carry a survivor bitmap"
        assert not np.any(params[name].data[~bitmap]), "Pruned positions decode to zero"
        assert parsed.tensors[name].quantized.codes.size == int(bitmap.sum()), "Only survivors are coded"
    assert parsed.tensors["decoder.head.bias"].bitmap is None, "Biases are not pruned"


def test_embedding_only_artifact(cnerv_state: TrainState, video: FrameDataset) -> None:
    """Embeddings without a model decode only with the model they were produced for."""
    artifact = compress(
        cnerv_state.params, frame_embeddings(cnerv_state, video, [4]), CompressionConfig(), include_model=False
    )
    parsed = decode_artifact(encode_artifact(artifact)[0])
    assert not parsed.has_model, "No model section"
    assert list(decompress_embeddings(parsed, cnerv_state.params)) == [4], "Bound to the trained model"
    assert 4 in artifact_frames(parsed, model=cnerv_state.params), "Decodes with the given model"
    with pytest.raises(DigestMismatchError):
        decompress_embeddings(parsed, init(cnerv_state.config, seed=99))
    with pytest.raises(BitstreamError):
        decompress_model(parsed)


def test_nerv_artifact(nerv_state: TrainState, video: FrameDataset) -> None:
    """Index-based models decode the frame indices recorded in the header."""
    artifact = compress(nerv_state.params, [], CompressionConfig(), frame_ids=[1, 4], frame_times=[0.2, 0.5])
    frames = artifact_frames(decode_artifact(encode_artifact(artifact)[0]))
    assert list(frames) == [1, 4], "Recorded frames"
    assert frames[4].shape == (3, 16, 32), "Decoded frame"


def test_container_errors(cnerv_state: TrainState) -> None:
    """Foreign bytes and training checkpoints are not artifacts."""
    with pytest.raises(BitstreamError):
        decode_artifact(b"NOPE" + bytes(16))
    with pytest.raises(BitstreamError):
        decode_artifact(encode_checkpoint(cnerv_state))
    data, _ = encode_artifact(compress(cnerv_state.params, [], CompressionConfig()))
    with pytest.raises(BitstreamError):
        decode_artifact(data + b"\x00")
    with pytest.raises(BitstreamError):
        decode_checkpoint(data)
