import math
from dataclasses import dataclass
from typing import Optional, Tuple
import numpy as np
from cnerv.core.errors import FrameTimeError, ShapeError
from cnerv.schemas import CAEConfig, PositionalConfig
from cnerv.tensor import Tensor, ops
from .blocks import partition


@dataclass
class EmbeddingGrid:
    """Per-frame latent code.
    `values` is (L, M, N) after the 1x1 reduction or (C·P·Q, M, N) when `raw`.
    """
    values: Tensor
    frame_id: int = -1
    raw: bool = False

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape


def positional_encoding(t: float, cfg: PositionalConfig) -> np.ndarray:
    """[sin(b⁰πt), cos(b⁰πt), ..., sin(b^(l-1)πt), cos(b^(l-1)πt)] for a frame index t in [0, 1]."""
    if not 0.0 <= t <= 1.0:
        raise FrameTimeError(f"positional_encoding: t={t} is outside [0, 1]")
    phase = (cfg.b ** np.arange(cfg.l, dtype=np.float64)) * math.pi * t
    out = np.empty(2 * cfg.l, dtype=np.float64)
    out[0::2] = np.sin(phase)
    out[1::2] = np.cos(phase)
    return out


def frame_time(index: int, n_frames: int) -> float:
    """Normalized index of frame `index` among `n_frames`: (i + 1) / n."""
    return (index + 1) / n_frames


def cosine_basis(length: int, frequencies: int, b: float) -> np.ndarray:
    """(frequencies, length) matrix cos(b^p·π·x) at pixel centres x = (i + 0.5) / length."""
    x = (np.arange(length, dtype=np.float64) + 0.5) / length
    return np.cos(np.outer(b ** np.arange(frequencies, dtype=np.float64) * math.pi, x))


def content_adaptive_embedding(block: np.ndarray, cfg: CAEConfig) -> np.ndarray:
    """Γ(c,p,q) = Σ_{x,y} cos(b^p·π·x)·cos(b^q·π·y)·Img(c,x,y) for a (C, h, w) block.
    Computed separably as Bx · Img[c] · Byᵀ.
    """
    if block.ndim != 3:
        raise ShapeError(f"content_adaptive_embedding: expected (C,h,w), got {block.shape}")
    _, h, w = block.shape
    bx = cosine_basis(h, cfg.P, cfg.b)
    by = cosine_basis(w, cfg.Q, cfg.b)
    return np.matmul(np.matmul(bx, block.astype(np.float64)), by.T)


def raw_embedding(image: np.ndarray, cfg: CAEConfig) -> np.ndarray:
    """Concatenated block embeddings (C·P·Q, M, N), channel-major then p then q."""
    grid = partition(np.asarray(image, dtype=np.float64), cfg.M, cfg.N).grid()
    _, _, c, h, w = grid.shape
    bx = cosine_basis(h, cfg.P, cfg.b)
    by = cosine_basis(w, cfg.Q, cfg.b)
    # (M, N, C, P, Q)
    gamma = np.matmul(np.matmul(bx, grid), by.T)
    return np.ascontiguousarray(gamma.transpose(2, 3, 4, 0, 1).reshape(c * cfg.P * cfg.Q, cfg.M, cfg.N))


def encode_image(
    image: np.ndarray,
    cfg: CAEConfig,
    reducer_weight: Tensor,
    reducer_bias: Optional[Tensor] = None,
    frame_id: int = -1,
    raw: Optional[np.ndarray] = None
) -> EmbeddingGrid:
    """Raw block embeddings reduced to (L, M, N) with the learned 1x1 convolution.
    :param raw: precomputed `raw_embedding(image, cfg)`, skips the projection
    """
    raw = raw_embedding(image, cfg) if raw is None else raw
    if reducer_weight.shape[1:] != (raw.shape[0], 1, 1):
        raise ShapeError(
            f"encode_image: reducer expects {reducer_weight.shape[1]} input channels, "
            f"raw embedding has {raw.shape[0]} (C·P·Q)"
        )
    values = ops.conv2d(Tensor(raw, dtype=reducer_weight.dtype), reducer_weight, reducer_bias)
    return EmbeddingGrid(values=values, frame_id=frame_id)
