from typing import List, Literal, Optional, Tuple
from pydantic import Field, PositiveInt, conint, confloat
from cnerv.core.config import settings
from .analysis import UniformityConfig
from .base import StrictModel
from .compression import CompressionConfig
from .model import ModelConfig
from .objective import LossConfig
from .trainer import OptimConfig, SplitSpec


class SynthConfig(StrictModel):
    """Procedurally generated toy video."""
    kind: Literal["moving-gradient", "bouncing-rect", "static"] = "bouncing-rect"
    n: PositiveInt = 16
    H: PositiveInt = 32
    W: PositiveInt = 64
    C: PositiveInt = 3
    seed: int = 0


class DataConfig(StrictModel):
    """Frame source: a directory of numbered frames or a synthetic video."""
    frames_dir: Optional[str] = None
    synth: SynthConfig = Field(default_factory=SynthConfig)
    crop: Optional[Tuple[PositiveInt, PositiveInt]] = None
    downsample: PositiveInt = 1


class SweepConfig(StrictModel):
    """Grid of the `sweep` command; empty axes keep the run config value."""
    b: List[confloat(gt=1.0)] = []  # type: ignore
    PQ: List[PositiveInt] = []
    blocks: List[Tuple[PositiveInt, PositiveInt]] = []
    L: List[PositiveInt] = []
    bits_embed: List[conint(ge=1, le=32)] = [32, 8, 6, 4, 2, 1]  # type: ignore


class RunConfig(StrictModel):
    """Every module configuration of a run in one document."""
    model: ModelConfig = Field(default_factory=ModelConfig.toy)
    loss: LossConfig = Field(default_factory=LossConfig)
    split: SplitSpec = Field(default_factory=SplitSpec)
    optim: OptimConfig = Field(default_factory=OptimConfig)
    compression: CompressionConfig = Field(default_factory=CompressionConfig)
    uniformity: UniformityConfig = Field(default_factory=UniformityConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    precision: Literal["single", "double"] = settings.PRECISION
