from typing import Union
import numpy as np
from cnerv.core.errors import ShapeError
from cnerv.schemas import LossConfig
from cnerv.tensor import Tensor, ops
from .ssim import ssim


def loss(y: Tensor, v: Union[Tensor, np.ndarray], cfg: LossConfig = LossConfig()) -> Tensor:
    """α·mean|y − v| + (1 − α)·(1 − SSIM(y, v)) on unclamped predictions."""
    target = v if isinstance(v, Tensor) else Tensor(np.asarray(v, dtype=y.dtype), dtype=y.dtype)
    if y.shape != target.shape:
        raise ShapeError(f"loss: prediction {y.shape} and target {target.shape} differ")
    l1 = ops.mean(ops.absolute(y - target))
    structural = 1.0 - ssim(y, target, cfg)
    return l1 * cfg.alpha + structural * (1.0 - cfg.alpha)
