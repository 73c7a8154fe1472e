from cnerv.schemas import ModelConfig
from cnerv.tensor import Tensor, ops
from .params import ModelParams


def nerv_blocks(feature: Tensor, params: ModelParams, config: ModelConfig) -> Tensor:
    """Image-wise decoding: K x (3x3 conv -> pixel shuffle -> GELU), then a linear 3x3 head."""
    x = feature
    for k, r in enumerate(config.upscales or []):
        x = ops.conv2d(x, params[f"decoder.blocks.{k}.weight"], params[f"decoder.blocks.{k}.bias"])
        x = ops.gelu(ops.pixel_shuffle(x, r))
    return ops.conv2d(x, params["decoder.head.weight"], params["decoder.head.bias"])
