from pydantic import PositiveFloat
from .base import StrictModel


class UniformityConfig(StrictModel):
    """Temperature and row treatment of the uniformity statistic.
    `literal` selects the variant with differences of row norms.
    """
    t: PositiveFloat = 2.0
    normalize: bool = True
    literal: bool = False
