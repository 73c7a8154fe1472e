import random
from typing import Optional, Tuple
import numpy as np

rng = np.random.default_rng()


def random_shape(ndim: int, low: int = 1, high: int = 5) -> Tuple[int, ...]:
    """Generate a shape with `ndim` random extents in [low, high]."""
    return tuple(random.randint(low, high) for _ in range(ndim))


def random_array(shape: Tuple[int, ...], low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Generate a float64 array of uniform random values."""
    return rng.uniform(low, high, size=shape)


def random_image(C: int = 3, H: int = 16, W: int = 32) -> np.ndarray:
    """Generate a (C, H, W) image with values on the 8-bit grid of [0, 1]."""
    return rng.integers(0, 256, size=(C, H, W)).astype(np.float64) / 255.0


def random_codes(count: int, bit: int, probabilities: Optional[np.ndarray] = None) -> np.ndarray:
    """Generate quantization codes in [0, 2^bit]."""
    if probabilities is not None:
        return rng.choice(len(probabilities), size=count, p=probabilities).astype(np.int64)
    return rng.integers(0, 2 ** bit + 1, size=count, dtype=np.int64)
