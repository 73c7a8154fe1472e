from pydantic import PositiveFloat, PositiveInt, confloat, validator
from .base import StrictModel


class LossConfig(StrictModel):
    """Weighting of the L1 and SSIM terms plus the SSIM parameterization."""
    alpha: confloat(ge=0.0, le=1.0) = 0.7  # type: ignore
    window: PositiveInt = 11
    sigma: PositiveFloat = 1.5
    c1: PositiveFloat = 0.01 ** 2
    c2: PositiveFloat = 0.03 ** 2

    @validator("window")
    def window_is_odd(cls, v: int) -> int:
        if v % 2 == 0:
            raise ValueError(f"SSIM window must be odd, got {v}")
        return v
