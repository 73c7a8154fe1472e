from typing import Optional, Union
import numpy as np
from cnerv.core.errors import ModelKindError, ShapeError
from cnerv.embedding import EmbeddingGrid, encode_image
from cnerv.tensor import Tensor, ops
from .layers import nerv_blocks
from .params import ModelParams


def blockwise_decode(embedding: Union[EmbeddingGrid, Tensor], params: ModelParams) -> Tensor:
    """(L, M, N) latent -> (d, M·block_h, N·block_w) feature map.
    Every grid cell is decoded by the shared 1x1 convolution into its own d x block_h x block_w cube.
    """
    config = params.config
    z = embedding.values if isinstance(embedding, EmbeddingGrid) else embedding
    if z.shape != (config.L, config.M, config.N):
        raise ShapeError(f"cnerv: latent shape {z.shape} != (L, M, N) = {(config.L, config.M, config.N)}")
    cube = ops.conv2d(z, params["decoder.blockwise.weight"], params["decoder.blockwise.bias"])
    cube = ops.reshape(cube, (config.d, config.block_h, config.block_w, config.M, config.N))
    cube = ops.permute(cube, (0, 3, 1, 4, 2))
    return ops.reshape(cube, (config.d, config.M * config.block_h, config.N * config.block_w))


def cnerv_forward(embedding: Union[EmbeddingGrid, Tensor], params: ModelParams) -> Tensor:
    """Decode a latent grid into a (C, H, W) image (linear output, not clamped)."""
    if params.config.kind != "cnerv":
        raise ModelKindError("cnerv_forward needs CNeRV parameters")
    return nerv_blocks(blockwise_decode(embedding, params), params, params.config)


class CNeRV:
    """Single-layer content-adaptive encoder plus block-wise/image-wise decoder."""

    def __init__(self, params: ModelParams):
        if params.config.kind != "cnerv":
            raise ModelKindError(f"CNeRV cannot be built from '{params.config.kind}' parameters")
        self.params = params
        self.config = params.config

    def encode(self, image: np.ndarray, frame_id: int = -1, raw: Optional[np.ndarray] = None) -> EmbeddingGrid:
        return encode_image(
            image, self.config.cae, self.params["encoder.reducer.weight"], self.params["encoder.reducer.bias"],
            frame_id=frame_id, raw=raw
        )

    def decode(self, embedding: Union[EmbeddingGrid, Tensor]) -> Tensor:
        return cnerv_forward(embedding, self.params)

    def __call__(self, image: np.ndarray, raw: Optional[np.ndarray] = None) -> Tensor:
        return self.decode(self.encode(image, raw=raw))
