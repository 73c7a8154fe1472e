import pytest
from cnerv.data import FrameDataset, synth_toy_video
from cnerv.schemas import CAEConfig, ModelConfig, PositionalConfig
from cnerv.trainer import TrainState
from cnerv.tests.utils import create_state


@pytest.fixture(scope="session")
def cnerv_config() -> ModelConfig:
    """CNeRV small enough for finite differences: 2x4 blocks of 8x8, one x2 upscaling block."""
    return ModelConfig(
        kind="cnerv", C=3, H=16, W=32, L=4,
        cae=CAEConfig(b=1.15, P=3, Q=3, M=2, N=4), pos=PositionalConfig(b=1.25, l=4),
        d=8, block_h=4, block_w=4, K=1, min_channels=4,
    )


@pytest.fixture(scope="session")
def nerv_config() -> ModelConfig:
    """NeRV on the same 16x32 frames: a 4x8 feature map and two x2 upscaling blocks."""
    return ModelConfig(
        kind="nerv", C=3, H=16, W=32, pos=PositionalConfig(b=1.25, l=4),
        d=8, K=2, min_channels=4, mlp_hidden=8,
    )


@pytest.fixture(scope="session")
def video() -> FrameDataset:
    """Ten 16x32 frames of a bouncing rectangle (unseen frames 4 and 9 by default)."""
    return synth_toy_video("bouncing-rect", 10, 16, 32, seed=0)


@pytest.fixture(scope="session")
def static_video() -> FrameDataset:
    """Ten identical 16x32 frames."""
    return synth_toy_video("static", 10, 16, 32, seed=0)


@pytest.fixture(scope="session")
def cnerv_state(cnerv_config: ModelConfig, video: FrameDataset) -> TrainState:
    """Briefly trained CNeRV; tests must not modify it."""
    return create_state(cnerv_config, video)


@pytest.fixture(scope="session")
def nerv_state(nerv_config: ModelConfig, video: FrameDataset) -> TrainState:
    """Briefly trained NeRV; tests must not modify it."""
    return create_state(nerv_config, video)
