import math
import numpy as np
import pytest
from cnerv.core.errors import FrameTimeError, ShapeError
from cnerv.embedding import (
    content_adaptive_embedding, encode_image, frame_time, partition, positional_encoding, raw_embedding
)
from cnerv.schemas import CAEConfig, ModelConfig, PositionalConfig
from cnerv.tensor import Tensor
from cnerv.tests.utils import random_array, random_image


def naive_projection(block: np.ndarray, cfg: CAEConfig) -> np.ndarray:
    """Γ(c,p,q) = Σ_{x,y} cos(b^p·π·x)·cos(b^q·π·y)·block(c,x,y) with x, y at pixel centres."""
    c, h, w = block.shape
    out = np.zeros((c, cfg.P, cfg.Q))
    for ch in range(c):
        for p in range(cfg.P):
            for q in range(cfg.Q):
                total = 0.0
                for i in range(h):
                    for j in range(w):
                        x, y = (i + 0.5) / h, (j + 0.5) / w
                        basis = math.cos(cfg.b ** p * math.pi * x) * math.cos(cfg.b ** q * math.pi * y)
                        total += basis * block[ch, i, j]
                out[ch, p, q] = total
    return out


@pytest.mark.parametrize("execution_number", range(3))
def test_projection_matches_sum(execution_number: int) -> None:
    """The separable projection equals the explicit double sum."""
    cfg = CAEConfig(b=1.15, P=4, Q=5, M=1, N=1)
    block = random_array((2, 6, 7), 0.0, 1.0)
    projected = content_adaptive_embedding(block, cfg)
    expected = naive_projection(block, cfg)
    assert np.allclose(projected, expected, rtol=0.0, atol=1e-12), "Projection onto the cosine basis"


@pytest.mark.parametrize("execution_number", range(3))
def test_projection_is_linear(execution_number: int) -> None:
    """Embedding a weighted sum of images gives the weighted sum of their embeddings."""
    cfg = CAEConfig(b=1.15, P=3, Q=3, M=2, N=4)
    a, b = random_image(3, 16, 32), random_image(3, 16, 32)
    alpha, beta = 0.5 + execution_number, -1.75
    mixed = raw_embedding(alpha * a + beta * b, cfg)
    expected = alpha * raw_embedding(a, cfg) + beta * raw_embedding(b, cfg)
    assert np.allclose(mixed, expected, rtol=0.0, atol=1e-10), "Linear in the image"


def test_embedding_is_local() -> None:
    """Changing pixels of one block changes only that block's grid cell."""
    cfg = CAEConfig(b=1.15, P=3, Q=3, M=2, N=4)
    image = random_image(3, 16, 32)
    changed = image.copy()
    # block (1, 2) covers rows 8..15 and columns 16..23
    changed[:, 9:12, 17:22] = 1.0 - changed[:, 9:12, 17:22]
    diff = np.any(raw_embedding(changed, cfg) != raw_embedding(image, cfg), axis=0)
    expected = np.zeros((2, 4), dtype=bool)
    expected[1, 2] = True
    assert np.array_equal(diff, expected), "Exactly one grid cell moves"


def test_raw_embedding_layout() -> None:
    """Raw channel c·P·Q + p·Q + q of cell (m, n) holds Γ(c, p, q) of block (m, n)."""
    cfg = CAEConfig(b=1.15, P=3, Q=2, M=2, N=4)
    image = random_image(3, 8, 16)
    raw = raw_embedding(image, cfg)
    assert raw.shape == (3 * 3 * 2, 2, 4), "(C·P·Q, M, N)"
    blocks = partition(image, 2, 4).grid()
    for m in range(2):
        for n in range(4):
            gamma = content_adaptive_embedding(blocks[m, n], cfg)
            assert np.allclose(raw[:, m, n], gamma.reshape(-1), atol=1e-12), "Channel-major, then p, then q"


def test_encode_image(cnerv_config: ModelConfig) -> None:
    """The reduced embedding is (L, M, N) and a mismatched reducer is rejected."""
    cfg = cnerv_config.cae
    raw_channels = cnerv_config.C * cfg.P * cfg.Q
    weight = Tensor(random_array((cnerv_config.L, raw_channels, 1, 1)))
    bias = Tensor(random_array((cnerv_config.L,)))
    image = random_image(3, 16, 32)
    grid = encode_image(image, cfg, weight, bias, frame_id=7)
    assert grid.shape == (cnerv_config.L, cfg.M, cfg.N), "(L, M, N) latent"
    assert grid.frame_id == 7, "Frame id is carried along"
    reduced = np.einsum("lr,rmn->lmn", weight.data[:, :, 0, 0], raw_embedding(image, cfg))
    expected = reduced + bias.data[:, None, None]
    assert np.allclose(grid.values.data, expected, atol=1e-10), "1x1 reduction of the raw embedding"
    with pytest.raises(ShapeError):
        encode_image(image, cfg, Tensor(random_array((cnerv_config.L, raw_channels + 1, 1, 1))))


def test_positional_encoding() -> None:
    """Interleaved sin/cos at frequencies b^p·π."""
    cfg = PositionalConfig(b=1.25, l=6)
    at_zero = positional_encoding(0.0, cfg)
    assert at_zero.shape == (12,), "Length 2·l"
    assert np.allclose(at_zero[0::2], 0.0) and np.allclose(at_zero[1::2], 1.0), "sin 0 = 0, cos 0 = 1"
    t = 0.3
    out = positional_encoding(t, cfg)
    for p in range(cfg.l):
        assert abs(out[2 * p] - math.sin(1.25 ** p * math.pi * t)) < 1e-12, "Even entries are sines"
        assert abs(out[2 * p + 1] - math.cos(1.25 ** p * math.pi * t)) < 1e-12, "Odd entries are cosines"
    with pytest.raises(FrameTimeError):
        positional_encoding(1.5, cfg)
    with pytest.raises(FrameTimeError):
        positional_encoding(-0.1, cfg)


def test_frame_time() -> None:
    """Normalized index (i + 1) / n lies in (0, 1]."""
    assert frame_time(0, 10) == 0.1, "First frame"
    assert frame_time(9, 10) == 1.0, "Last frame"
