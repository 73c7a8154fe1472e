from .analysis import UniformityConfig
from .compression import CompressionConfig
from .embedding import CAEConfig, PositionalConfig
from .model import ModelConfig
from .objective import LossConfig
from .run import DataConfig, RunConfig, SweepConfig, SynthConfig
from .trainer import OptimConfig, SplitSpec
