from typing import Tuple, Union
import numpy as np
from cnerv.core.errors import ShapeError
from cnerv.schemas import LossConfig
from cnerv.tensor import Tensor, ops

ArrayLike = Union[Tensor, np.ndarray]


def gaussian_window(size: int, sigma: float) -> np.ndarray:
    """Normalized 1-d Gaussian of odd length `size`."""
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x ** 2) / (2.0 * sigma ** 2))
    return g / g.sum()


def fitting_window(window: int, height: int, width: int) -> int:
    """Largest odd window not exceeding `window` nor the image."""
    size = min(window, height, width)
    return size if size % 2 else size - 1


def _as_tensor(x: ArrayLike, like: Tensor) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=like.dtype), dtype=like.dtype)


def ssim_terms(y: Tensor, v: ArrayLike, cfg: LossConfig) -> Tuple[Tensor, Tensor]:
    """Local luminance and contrast-structure maps of two (C, H, W) images."""
    target = _as_tensor(v, y)
    if y.shape != target.shape or len(y.shape) != 3:
        raise ShapeError(f"ssim: shapes {y.shape} and {target.shape} differ or are not (C,H,W)")
    window = gaussian_window(fitting_window(cfg.window, y.shape[1], y.shape[2]), cfg.sigma)
    mu_y = ops.separable_filter(y, window)
    mu_v = ops.separable_filter(target, window)
    mu_yy = mu_y * mu_y
    mu_vv = mu_v * mu_v
    mu_yv = mu_y * mu_v
    sigma_y = ops.separable_filter(y * y, window) - mu_yy
    sigma_v = ops.separable_filter(target * target, window) - mu_vv
    sigma_yv = ops.separable_filter(y * target, window) - mu_yv
    luminance = (mu_yv * 2.0 + cfg.c1) / (mu_yy + mu_vv + cfg.c1)
    contrast_structure = (sigma_yv * 2.0 + cfg.c2) / (sigma_y + sigma_v + cfg.c2)
    return luminance, contrast_structure


def ssim(y: Tensor, v: ArrayLike, cfg: LossConfig = LossConfig()) -> Tensor:
    """Mean local SSIM with a Gaussian window; differentiable with respect to `y`."""
    luminance, contrast_structure = ssim_terms(y, v, cfg)
    return ops.mean(luminance * contrast_structure)


def ssim_value(y: np.ndarray, v: np.ndarray, cfg: LossConfig = LossConfig()) -> float:
    return ssim(Tensor(y, dtype=np.float64), np.asarray(v, dtype=np.float64), cfg).item()


def constant_ssim(a: float, b: float, cfg: LossConfig = LossConfig()) -> float:
    """SSIM of two constant images: only the luminance term differs from one."""
    return (2.0 * a * b + cfg.c1) / (a * a + b * b + cfg.c1)


def scale_count(height: int, width: int, window: int, scales: int) -> int:
    """Number of dyadic scales such that the coarsest image still holds half a window."""
    count = scales
    while count > 1 and min(height, width) < (2 ** (count - 1)) * (window // 2 + 1):
        count -= 1
    return count


def downsample2(image: np.ndarray) -> np.ndarray:
    """2x2 average pooling of a (C, H, W) array, dropping an odd last row/column."""
    c, h, w = image.shape
    h2, w2 = h // 2, w // 2
    return image[:, :2 * h2, :2 * w2].reshape(c, h2, 2, w2, 2).mean(axis=(2, 4))
