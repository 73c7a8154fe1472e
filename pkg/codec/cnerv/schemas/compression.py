from pydantic import NonNegativeInt, conint, confloat
from .base import StrictModel


class CompressionConfig(StrictModel):
    """Pruning ratio and quantization widths of the model and the embeddings."""
    bits_model: conint(ge=1, le=32) = 8  # type: ignore
    bits_embed: conint(ge=1, le=32) = 32  # type: ignore
    prune_ratio: confloat(ge=0.0, lt=1.0) = 0.0  # type: ignore
    per_layer: bool = False
    finetune_epochs: NonNegativeInt = 0
