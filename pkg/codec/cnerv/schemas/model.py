from typing import Any, Dict, List, Literal, Optional
from pydantic import Field, PositiveInt, root_validator
from .base import StrictModel
from .embedding import CAEConfig, PositionalConfig


class ModelConfig(StrictModel):
    """Architecture of a CNeRV or NeRV network.

    The decoder starts from a (d, feature_h, feature_w) map: for CNeRV it is the
    reshaped output of the block-wise 1x1 decoder (M·block_h, N·block_w), for NeRV
    the reshaped MLP output (H/Π, W/Π) with Π the product of the upscale factors.
    """
    kind: Literal["cnerv", "nerv"] = "cnerv"
    C: PositiveInt = 3
    H: PositiveInt = 32
    W: PositiveInt = 64
    L: PositiveInt = 16
    cae: CAEConfig = Field(default_factory=CAEConfig)
    pos: PositionalConfig = Field(default_factory=PositionalConfig)
    d: PositiveInt = 32
    block_h: PositiveInt = 4
    block_w: PositiveInt = 4
    K: PositiveInt = 2
    upscales: Optional[List[PositiveInt]] = None
    min_channels: PositiveInt = 16
    mlp_hidden: PositiveInt = 256
    mlp_layers: PositiveInt = 2
    seed: int = 0

    @root_validator(skip_on_failure=True)
    def check_geometry(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        upscales = values.get("upscales") or [2] * values["K"]
        if len(upscales) != values["K"]:
            raise ValueError(f"upscales has {len(upscales)} entries, expected K={values['K']}")
        values["upscales"] = list(upscales)
        total = 1
        for r in upscales:
            total *= r
        height, width = values["H"], values["W"]
        if values["kind"] == "cnerv":
            cae: CAEConfig = values["cae"]
            if height % cae.M:
                raise ValueError(f"image height {height} is not divisible by M={cae.M}")
            if width % cae.N:
                raise ValueError(f"image width {width} is not divisible by N={cae.N}")
            if cae.M * values["block_h"] * total != height:
                raise ValueError(
                    f"feature height M·block_h={cae.M * values['block_h']} times upscale {total} != H={height}"
                )
            if cae.N * values["block_w"] * total != width:
                raise ValueError(
                    f"feature width N·block_w={cae.N * values['block_w']} times upscale {total} != W={width}"
                )
        else:
            if height % total or width % total:
                raise ValueError(f"H={height} and W={width} must be divisible by the upscale product {total}")
        return values

    @property
    def M(self) -> int:
        return self.cae.M

    @property
    def N(self) -> int:
        return self.cae.N

    @property
    def upscale_product(self) -> int:
        total = 1
        for r in self.upscales or []:
            total *= r
        return total

    @property
    def feature_h(self) -> int:
        return self.H // self.upscale_product

    @property
    def feature_w(self) -> int:
        return self.W // self.upscale_product

    @property
    def channels(self) -> List[int]:
        """Channel count entering each NeRV block plus the count leaving the last one."""
        schedule = [self.d]
        for _ in range(self.K):
            schedule.append(max(schedule[-1] // 2, self.min_channels))
        return schedule

    @classmethod
    def full_scale(cls, kind: str = "cnerv") -> "ModelConfig":
        """480x960 architecture: 2x4 blocks, L=60, 620x30x60 block-wise output, 4 blocks of x2."""
        return cls(
            kind=kind, C=3, H=480, W=960, L=60,
            cae=CAEConfig(b=1.15, P=15, Q=15, M=2, N=4),
            pos=PositionalConfig(b=1.25, l=240),
            d=620, block_h=15, block_w=15, K=4,
        )

    @classmethod
    def toy(cls, kind: str = "cnerv", seed: int = 0) -> "ModelConfig":
        """32x64 desk-scale architecture."""
        if kind == "nerv":
            return cls(
                kind="nerv", C=3, H=32, W=64, pos=PositionalConfig(b=1.25, l=16),
                d=32, K=3, mlp_hidden=256, seed=seed,
            )
        return cls(
            kind="cnerv", C=3, H=32, W=64, L=16,
            cae=CAEConfig(b=1.15, P=15, Q=15, M=2, N=4), pos=PositionalConfig(b=1.25, l=16),
            d=32, block_h=4, block_w=4, K=2, seed=seed,
        )
