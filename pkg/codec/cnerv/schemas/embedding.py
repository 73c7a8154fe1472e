from pydantic import PositiveInt, confloat
from .base import StrictModel


class CAEConfig(StrictModel):
    """Content-adaptive embedding: frequency base, frequency lengths and block grid."""
    b: confloat(gt=1.0) = 1.15  # type: ignore
    P: PositiveInt = 15
    Q: PositiveInt = 15
    M: PositiveInt = 2
    N: PositiveInt = 4

    @property
    def raw_length(self) -> int:
        """Raw per-block embedding length for a single channel."""
        return self.P * self.Q


class PositionalConfig(StrictModel):
    """Frame-index positional encoding; output length is 2·l."""
    b: confloat(gt=1.0) = 1.25  # type: ignore
    l: PositiveInt = 240

    @property
    def length(self) -> int:
        return 2 * self.l
