import math
from typing import Optional
import numpy as np
from scipy.spatial.distance import pdist
from scipy.special import logsumexp
from cnerv.core.errors import AnalysisError
from cnerv.schemas import UniformityConfig
from .embeddings import EmbeddingMatrix


def normalize_rows(values: np.ndarray) -> np.ndarray:
    """L2-normalized rows; all-zero rows stay zero."""
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    return np.divide(values, norms, out=np.zeros_like(values), where=norms > 0)


def _rows(matrix: EmbeddingMatrix, what: str, normalize: bool = True) -> np.ndarray:
    if matrix.rows < 2:
        raise AnalysisError(f"{what} needs at least 2 rows, got {matrix.rows}")
    return normalize_rows(matrix.values) if normalize else matrix.values


def uniformity(
    matrix: EmbeddingMatrix,
    cfg: UniformityConfig = UniformityConfig(),
    split: Optional[str] = None
) -> float:
    """log of the mean over distinct row pairs of exp(-t·‖f(x) - f(y)‖²).

    With `cfg.literal` the distance is the difference of the row norms instead.
    :param split: restrict to rows labelled "seen" or "unseen"
    """
    values = _rows(matrix.subset(split), "uniformity", cfg.normalize)
    if cfg.literal:
        norms = np.linalg.norm(values, axis=1)[:, None]
        squared = pdist(norms, "sqeuclidean")
    else:
        squared = pdist(values, "sqeuclidean")
    return float(logsumexp(-cfg.t * squared) - math.log(squared.size))


def neighbor_distance(matrix: EmbeddingMatrix, normalize: bool = True) -> float:
    """Mean distance between consecutive rows."""
    values = _rows(matrix, "neighbor_distance", normalize)
    return float(np.mean(np.linalg.norm(values[1:] - values[:-1], axis=1)))


def normalized_distance(matrix: EmbeddingMatrix, normalize: bool = True) -> float:
    """Neighbor distance divided by the mean distance over all pairs (0 when that mean is 0)."""
    values = _rows(matrix, "normalized_distance", normalize)
    overall = float(np.mean(pdist(values, "euclidean")))
    if overall == 0.0:
        return 0.0
    return neighbor_distance(matrix, normalize) / overall
