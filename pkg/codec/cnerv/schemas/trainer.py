import hashlib
from typing import Any, Dict, Optional
from pydantic import NonNegativeInt, PositiveFloat, PositiveInt, confloat, root_validator
from .base import StrictModel


class SplitSpec(StrictModel):
    """Seen/unseen partition: frames with index ≡ phase (mod period) are unseen."""
    period: PositiveInt = 5
    phase: NonNegativeInt = 4
    shuffle: bool = False
    seed: int = 0

    @root_validator(skip_on_failure=True)
    def phase_in_period(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        if values["phase"] >= values["period"]:
            raise ValueError(f"phase {values['phase']} must be smaller than period {values['period']}")
        return values

    def digest(self) -> str:
        """Short stable fingerprint recorded in artifacts."""
        return hashlib.sha256(self.json(sort_keys=True).encode("utf-8")).hexdigest()[:16]  # type: ignore


class OptimConfig(StrictModel):
    """Adam with cosine decay and linear warm-up."""
    lr: confloat(ge=0.0) = 5e-4  # type: ignore
    beta1: confloat(ge=0.0, lt=1.0) = 0.9  # type: ignore
    beta2: confloat(ge=0.0, lt=1.0) = 0.999  # type: ignore
    eps: PositiveFloat = 1e-8
    warmup_fraction: confloat(ge=0.0, lt=1.0) = 0.1  # type: ignore
    epochs: PositiveInt = 100
    max_steps: Optional[PositiveInt] = None
    eval_every: PositiveInt = 10
    seed: int = 0
