import math
from collections import OrderedDict
from typing import Dict, Iterator, List, Mapping, Optional, Tuple
import numpy as np
from cnerv.core.errors import ConfigError, ShapeError
from cnerv.schemas import ModelConfig
from cnerv.tensor import Tensor, default_dtype

Shape = Tuple[int, ...]


def param_shapes(config: ModelConfig) -> "OrderedDict[str, Shape]":
    """Name and shape of every learned tensor, in serialization order.
    Derivable from the config alone, which is what lets a bitstream carry only values.
    """
    shapes: "OrderedDict[str, Shape]" = OrderedDict()
    d = config.d
    if config.kind == "cnerv":
        raw = config.C * config.cae.P * config.cae.Q
        shapes["encoder.reducer.weight"] = (config.L, raw, 1, 1)
        shapes["encoder.reducer.bias"] = (config.L,)
        cube = d * config.block_h * config.block_w
        shapes["decoder.blockwise.weight"] = (cube, config.L, 1, 1)
        shapes["decoder.blockwise.bias"] = (cube,)
    else:
        widths = [config.pos.length] + [config.mlp_hidden] * config.mlp_layers
        widths.append(d * config.feature_h * config.feature_w)
        for i, (n_in, n_out) in enumerate(zip(widths[:-1], widths[1:])):
            shapes[f"mlp.{i}.weight"] = (n_out, n_in)
            shapes[f"mlp.{i}.bias"] = (n_out,)
    channels = config.channels
    for k, r in enumerate(config.upscales or []):
        shapes[f"decoder.blocks.{k}.weight"] = (channels[k + 1] * r * r, channels[k], 3, 3)
        shapes[f"decoder.blocks.{k}.bias"] = (channels[k + 1] * r * r,)
    shapes["decoder.head.weight"] = (config.C, channels[-1], 3, 3)
    shapes["decoder.head.bias"] = (config.C,)
    return shapes


def param_count(config: ModelConfig) -> int:
    return int(sum(int(np.prod(shape)) for shape in param_shapes(config).values()))


class ModelParams:
    """Named learned tensors of one model, together with the config they belong to."""

    def __init__(self, config: ModelConfig, tensors: Mapping[str, Tensor]):
        expected = param_shapes(config)
        if list(tensors) != list(expected):
            raise ShapeError(f"parameter names {list(tensors)} do not match the config {list(expected)}")
        for name, shape in expected.items():
            if tensors[name].shape != shape:
                raise ShapeError(f"parameter {name} has shape {tensors[name].shape}, config requires {shape}")
        self.config = config
        self.tensors: "OrderedDict[str, Tensor]" = OrderedDict(tensors)

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self) -> List[Tuple[str, Tensor]]:
        return list(self.tensors.items())

    def count(self) -> int:
        return int(sum(t.size for t in self.tensors.values()))

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def prunable(self) -> List[str]:
        """Convolution and linear weights; biases are exempt from pruning."""
        return [name for name, t in self.tensors.items() if name.endswith(".weight") and len(t.shape) >= 2]

    def arrays(self) -> "OrderedDict[str, np.ndarray]":
        return OrderedDict((name, t.data) for name, t in self.tensors.items())

    def copy(self, requires_grad: bool = True) -> "ModelParams":
        return ModelParams.from_arrays(self.config, self.arrays(), requires_grad=requires_grad)

    @classmethod
    def from_arrays(
        cls,
        config: ModelConfig,
        arrays: Mapping[str, np.ndarray],
        requires_grad: bool = True,
        dtype: Optional[np.dtype] = None
    ) -> "ModelParams":
        return cls(config, OrderedDict(
            (name, Tensor(np.array(arrays[name], dtype=dtype or arrays[name].dtype), requires_grad=requires_grad))
            for name in param_shapes(config)
        ))


def init(config: ModelConfig, seed: Optional[int] = None, dtype: Optional[np.dtype] = None) -> ModelParams:
    """Kaiming-uniform weights (bound √(6 / fan_in)) and zero biases, deterministic per seed.

    The reducer sees raw cosine projections that grow with the block area, so its
    bound is further divided by the number of pixels in a block.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed if seed is None else seed))
    dtype = np.dtype(dtype or default_dtype())
    tensors: Dict[str, Tensor] = OrderedDict()
    for name, shape in param_shapes(config).items():
        if name.endswith(".bias"):
            values = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = math.sqrt(6.0 / fan_in)
            if name == "encoder.reducer.weight":
                bound /= (config.H // config.cae.M) * (config.W // config.cae.N)
            values = rng.uniform(-bound, bound, size=shape)
        tensors[name] = Tensor(values.astype(dtype), requires_grad=True)
    return ModelParams(config, tensors)


def match_param_budget(
    target: int,
    config: ModelConfig,
    field: str = "mlp_hidden",
    tolerance: float = 0.05,
    upper: int = 4096
) -> ModelConfig:
    """Pick the integer `field` value whose parameter count is closest to `target`.
    :param tolerance: maximum accepted |count - target| / max(count, target)
    """
    def count_for(value: int) -> int:
        return param_count(config.copy(update={field: value}))

    lo, hi = 1, upper
    while lo < hi:
        mid = (lo + hi) // 2
        if count_for(mid) < target:
            lo = mid + 1
        else:
            hi = mid
    candidates = [v for v in (lo - 1, lo) if v >= 1]
    best = min(candidates, key=lambda v: abs(count_for(v) - target))
    gap = abs(count_for(best) - target) / max(count_for(best), target)
    if gap >= tolerance:
        raise ConfigError(
            f"no value of {field} brings the parameter count within {tolerance:.0%} of {target} "
            f"(closest {count_for(best)})"
        )
    return config.copy(update={field: best})


def nerv_baseline(config: ModelConfig, tolerance: float = 0.05) -> ModelConfig:
    """NeRV counterpart of a CNeRV config: same frame size, decoder width and positional
    encoding, one more upscaling block when the frame size allows it, MLP width chosen
    to match the CNeRV parameter count.
    """
    if config.kind != "cnerv":
        raise ConfigError("nerv_baseline expects a CNeRV config")
    deeper = 2 ** (config.K + 1)
    k = config.K + 1 if config.H % deeper == 0 and config.W % deeper == 0 else config.K
    base = ModelConfig(
        kind="nerv", C=config.C, H=config.H, W=config.W, pos=config.pos, d=config.d, K=k,
        min_channels=config.min_channels, mlp_layers=config.mlp_layers, seed=config.seed,
    )
    return match_param_budget(param_count(config), base, tolerance=tolerance)
