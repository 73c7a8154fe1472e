import logging
from collections import OrderedDict
from typing import Dict, Mapping, Tuple
import numpy as np
from cnerv.core.errors import ConfigError
from cnerv.models import ModelParams

logger = logging.getLogger(__name__)

Masks = Dict[str, np.ndarray]


def prune_arrays(
    weights: Mapping[str, np.ndarray],
    ratio: float,
    per_layer: bool = False
) -> Tuple["OrderedDict[str, np.ndarray]", Masks]:
    """Zero the floor(ratio · count) smallest-magnitude weights.
    Global ranking over all tensors by default, one ranking per tensor with `per_layer`.
    Ties are broken by position (stable sort), so the result is deterministic.
    """
    if not 0.0 <= ratio < 1.0:
        raise ConfigError(f"prune ratio {ratio} is outside [0, 1)")
    pruned: "OrderedDict[str, np.ndarray]" = OrderedDict()
    masks: Masks = OrderedDict()
    groups = [[name] for name in weights] if per_layer else [list(weights)]
    for names in groups:
        flat = np.concatenate([np.abs(np.asarray(weights[name])).reshape(-1) for name in names])
        keep = np.ones(flat.size, dtype=bool)
        k = int(np.floor(ratio * flat.size))
        if k:
            keep[np.argsort(flat, kind="stable")[:k]] = False
        offset = 0
        for name in names:
            array = np.asarray(weights[name])
            mask = keep[offset:offset + array.size].reshape(array.shape)
            offset += array.size
            masks[name] = mask
            pruned[name] = np.where(mask, array, np.zeros_like(array))
    return pruned, masks


def prune(params: ModelParams, ratio: float, per_layer: bool = False) -> Tuple[ModelParams, Masks]:
    """Magnitude pruning of the convolution and linear weights; biases are kept.
    Returns a pruned copy and the survivor bitmap of every prunable tensor.
    """
    names = params.prunable()
    pruned, masks = prune_arrays(OrderedDict((name, params[name].data) for name in names), ratio, per_layer)
    arrays = params.arrays()
    arrays.update(pruned)
    zeroed = int(sum(mask.size - int(mask.sum()) for mask in masks.values()))
    logger.info("Pruned %d of %d weights (ratio %.3f)", zeroed, sum(m.size for m in masks.values()), ratio)
    return ModelParams.from_arrays(params.config, arrays), masks
