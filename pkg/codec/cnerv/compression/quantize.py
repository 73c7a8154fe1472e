import math
from dataclasses import dataclass
from typing import Tuple, Union
import numpy as np
from cnerv.core.errors import QuantizationError
from cnerv.tensor import Tensor

ArrayLike = Union[Tensor, np.ndarray]


@dataclass
class QuantizedTensor:
    """Affine quantization of one tensor: value ≈ mu_min + code · scale.

    scale = (mu_max - mu_min) / 2^bit, so codes take values 0..2^bit (2^bit + 1 levels).
    A constant tensor is stored with scale 0 and all-zero codes.
    """
    mu_min: float
    scale: float
    bit: int
    codes: np.ndarray
    shape: Tuple[int, ...]

    @property
    def constant(self) -> bool:
        return self.scale == 0.0

    @property
    def levels(self) -> int:
        return 2 ** self.bit + 1


def code_width(bit: int) -> int:
    """Bits needed for one raw code: ⌈log2(2^bit + 1)⌉."""
    return int(math.ceil(math.log2(2 ** bit + 1)))


def round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize(mu: ArrayLike, bit: int) -> QuantizedTensor:
    values = np.asarray(mu.data if isinstance(mu, Tensor) else mu, dtype=np.float64)
    if not 1 <= bit <= 32:
        raise QuantizationError(f"bit width {bit} is outside 1..32")
    if values.size == 0:
        raise QuantizationError("cannot quantize an empty tensor")
    if not np.all(np.isfinite(values)):
        raise QuantizationError("cannot quantize a tensor with non-finite values")
    mu_min, mu_max = float(values.min()), float(values.max())
    scale = (mu_max - mu_min) / 2 ** bit
    if scale == 0.0:
        codes = np.zeros(values.shape, dtype=np.int64)
    else:
        codes = round_half_away((values - mu_min) / scale).astype(np.int64)
        np.clip(codes, 0, 2 ** bit, out=codes)
    return QuantizedTensor(mu_min=mu_min, scale=scale, bit=bit, codes=codes, shape=values.shape)


def dequantize_array(q: QuantizedTensor) -> np.ndarray:
    if q.constant:
        return np.full(q.shape, q.mu_min, dtype=np.float64)
    return (q.mu_min + q.codes.astype(np.float64) * q.scale).reshape(q.shape)


def dequantize(q: QuantizedTensor) -> Tensor:
    return Tensor(dequantize_array(q), dtype=np.float64)
