import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union
import numpy as np
from cnerv.core.errors import ShapeError
from cnerv.schemas import LossConfig
from cnerv.tensor import Tensor
from .ssim import downsample2, fitting_window, scale_count, ssim_terms

logger = logging.getLogger(__name__)

ArrayLike = Union[Tensor, np.ndarray]

MS_SSIM_WEIGHTS = (0.0448, 0.2856, 0.3001, 0.2363, 0.1333)
# PSNR of identical images
IDENTICAL = math.inf


def _array(x: ArrayLike) -> np.ndarray:
    return np.asarray(x.data if isinstance(x, Tensor) else x, dtype=np.float64)


def psnr(y: ArrayLike, v: ArrayLike, max_val: float = 1.0) -> float:
    """10·log10(max_val² / MSE) in dB; `IDENTICAL` (+inf) when MSE is zero."""
    a, b = _array(y), _array(v)
    if a.shape != b.shape:
        raise ShapeError(f"psnr: shapes {a.shape} and {b.shape} differ")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return IDENTICAL
    return 10.0 * math.log10(max_val ** 2 / mse)


def ms_ssim(
    y: ArrayLike,
    v: ArrayLike,
    scales: int = 5,
    weights: Optional[Sequence[float]] = None,
    cfg: LossConfig = LossConfig()
) -> float:
    """Multi-scale SSIM: contrast-structure at every scale, luminance at the coarsest.

    Images too small for `scales` dyadic levels get fewer scales (the coarsest level
    must hold at least half a window) and the weight vector is renormalized.
    Negative terms are clipped at zero, so the value lies in [0, 1].
    """
    a, b = _array(y), _array(v)
    if a.shape != b.shape or a.ndim != 3:
        raise ShapeError(f"ms_ssim: shapes {a.shape} and {b.shape} differ or are not (C,H,W)")
    weights = list(weights or MS_SSIM_WEIGHTS)[:scales]
    count = scale_count(a.shape[1], a.shape[2], cfg.window, len(weights))
    if count < len(weights):
        logger.info("MS-SSIM: %dx%d images support %d of %d scales", a.shape[1], a.shape[2], count, len(weights))
    weights = np.asarray(weights[:count], dtype=np.float64)
    weights = weights / weights.sum()
    result = 1.0
    for level in range(count):
        window = fitting_window(cfg.window, a.shape[1], a.shape[2])
        level_cfg = cfg.copy(update={"window": window})
        luminance, contrast_structure = ssim_terms(Tensor(a, dtype=np.float64), b, level_cfg)
        if level == count - 1:
            value = float(np.mean(luminance.data * contrast_structure.data))
        else:
            value = float(np.mean(contrast_structure.data))
            a, b = downsample2(a), downsample2(b)
        result *= max(value, 0.0) ** weights[level]
    return float(result)


@dataclass
class FrameMetrics:
    psnr: float
    ms_ssim: float


def evaluate(prediction: ArrayLike, target: ArrayLike, cfg: LossConfig = LossConfig()) -> FrameMetrics:
    """PSNR and MS-SSIM of a prediction clamped to [0, 1]."""
    pred = np.clip(_array(prediction), 0.0, 1.0)
    ref = _array(target)
    return FrameMetrics(psnr=psnr(pred, ref), ms_ssim=ms_ssim(pred, ref, cfg=cfg))
