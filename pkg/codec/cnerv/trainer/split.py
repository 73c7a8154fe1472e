from typing import Dict, List, NamedTuple
import numpy as np
from cnerv.core.errors import SplitError
from cnerv.embedding import frame_time
from cnerv.schemas import SplitSpec


class Split(NamedTuple):
    seen: List[int]
    unseen: List[int]


def split(n_frames: int, spec: SplitSpec) -> Split:
    """Frames with index ≡ phase (mod period) are unseen, every other frame is seen."""
    if n_frames < spec.period:
        raise SplitError(f"split needs at least {spec.period} frames, got {n_frames}")
    unseen = [i for i in range(n_frames) if i % spec.period == spec.phase]
    seen = [i for i in range(n_frames) if i % spec.period != spec.phase]
    return Split(seen=seen, unseen=unseen)


def frame_times(n_frames: int, spec: SplitSpec) -> Dict[int, float]:
    """Normalized index t fed to index-based models for every frame.
    With `spec.shuffle` the frame -> index assignment is a seeded permutation.
    """
    order = np.arange(n_frames)
    if spec.shuffle:
        order = np.random.Generator(np.random.PCG64(spec.seed)).permutation(n_frames)
    return {i: frame_time(int(order[i]), n_frames) for i in range(n_frames)}
