import numpy as np
from cnerv.core.errors import ModelKindError
from cnerv.embedding import positional_encoding
from cnerv.tensor import Tensor, ops
from .layers import nerv_blocks
from .params import ModelParams


def nerv_forward(t: float, params: ModelParams) -> Tensor:
    """Frame index t in [0, 1] -> positional encoding -> MLP -> NeRV blocks -> (C, H, W)."""
    config = params.config
    if config.kind != "nerv":
        raise ModelKindError("nerv_forward needs NeRV parameters")
    x = Tensor(positional_encoding(t, config.pos).astype(params["decoder.head.weight"].dtype))
    for i in range(config.mlp_layers + 1):
        x = ops.gelu(ops.linear(x, params[f"mlp.{i}.weight"], params[f"mlp.{i}.bias"]))
    feature = ops.reshape(x, (config.d, config.feature_h, config.feature_w))
    return nerv_blocks(feature, params, config)


class NeRV:
    """Index-to-image network; it has no encoder, unseen frames need fine-tuning."""

    def __init__(self, params: ModelParams):
        if params.config.kind != "nerv":
            raise ModelKindError(f"NeRV cannot be built from '{params.config.kind}' parameters")
        self.params = params
        self.config = params.config

    def embed(self, t: float) -> np.ndarray:
        return positional_encoding(t, self.config.pos)

    def __call__(self, t: float) -> Tensor:
        return nerv_forward(t, self.params)
