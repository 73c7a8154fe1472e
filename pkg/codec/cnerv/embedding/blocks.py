from dataclasses import dataclass
from typing import Tuple
import numpy as np
from cnerv.core.errors import ShapeError


@dataclass(frozen=True)
class BlockGrid:
    """Image split into an M x N grid of equally sized blocks.
    `blocks[m * N + n]` holds rows [m·H/M, (m+1)·H/M) and cols [n·W/N, (n+1)·W/N).
    """
    blocks: np.ndarray  # (M·N, C, H/M, W/N)
    M: int
    N: int
    source_shape: Tuple[int, int, int]

    def grid(self) -> np.ndarray:
        """Blocks arranged as (M, N, C, H/M, W/N)."""
        c, h, w = self.source_shape
        return self.blocks.reshape(self.M, self.N, c, h // self.M, w // self.N)


def partition(image: np.ndarray, M: int, N: int) -> BlockGrid:
    """Divide a (C, H, W) image into M x N blocks."""
    if image.ndim != 3:
        raise ShapeError(f"partition: expected a (C,H,W) image, got shape {image.shape}")
    c, h, w = image.shape
    if M < 1 or h % M:
        raise ShapeError(f"partition: height H={h} is not divisible by M={M}")
    if N < 1 or w % N:
        raise ShapeError(f"partition: width W={w} is not divisible by N={N}")
    bh, bw = h // M, w // N
    blocks = image.reshape(c, M, bh, N, bw).transpose(1, 3, 0, 2, 4).reshape(M * N, c, bh, bw)
    return BlockGrid(blocks=np.ascontiguousarray(blocks), M=M, N=N, source_shape=(c, h, w))


def assemble(grid: BlockGrid) -> np.ndarray:
    """Inverse of `partition`."""
    c, h, w = grid.source_shape
    bh, bw = h // grid.M, w // grid.N
    image = grid.blocks.reshape(grid.M, grid.N, c, bh, bw).transpose(2, 0, 3, 1, 4).reshape(c, h, w)
    return np.ascontiguousarray(image)
