import math
from typing import Dict, Mapping, Optional
import numpy as np
from cnerv.models import ModelParams
from cnerv.schemas import OptimConfig


def learning_rate(step: int, total_steps: int, cfg: OptimConfig) -> float:
    """Linear warm-up over the first `warmup_fraction` of the run, cosine decay to zero afterwards."""
    warmup = int(math.ceil(cfg.warmup_fraction * total_steps))
    if step < warmup:
        return cfg.lr * (step + 1) / warmup
    progress = (step - warmup) / max(1, total_steps - warmup)
    return cfg.lr * 0.5 * (1.0 + math.cos(math.pi * min(progress, 1.0)))


class Adam:
    """Adam with bias correction; moments are kept per parameter name."""

    def __init__(self, cfg: OptimConfig, params: ModelParams):
        self.cfg = cfg
        self.t = 0
        self.m: Dict[str, np.ndarray] = {name: np.zeros_like(p.data) for name, p in params.items()}
        self.v: Dict[str, np.ndarray] = {name: np.zeros_like(p.data) for name, p in params.items()}

    def load(self, t: int, m: Mapping[str, np.ndarray], v: Mapping[str, np.ndarray]) -> None:
        self.t = t
        self.m = {name: np.array(value) for name, value in m.items()}
        self.v = {name: np.array(value) for name, value in v.items()}

    def step(self, params: ModelParams, lr: float, masks: Optional[Mapping[str, np.ndarray]] = None) -> None:
        """Update every parameter in place from its accumulated gradient.
        :param masks: survivor bitmaps; masked weights are re-zeroed after the update
        """
        self.t += 1
        b1, b2 = self.cfg.beta1, self.cfg.beta2
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for name, p in params.items():
            assert p.grad is not None, f"parameter {name} does not track gradients"
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = lr * (m / c1) / (np.sqrt(v / c2) + self.cfg.eps)
            p.data -= update.astype(p.data.dtype, copy=False)
            if masks is not None and name in masks:
                p.data *= masks[name]
