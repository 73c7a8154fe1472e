import logging
from typing import Dict, List, Mapping, Tuple, Union
import numpy as np
from cnerv.core.errors import AnalysisError
from .embeddings import EmbeddingMatrix

logger = logging.getLogger(__name__)

Matrix = Union[EmbeddingMatrix, np.ndarray]


def _values(x: Matrix) -> np.ndarray:
    values = x.values if isinstance(x, EmbeddingMatrix) else np.asarray(x, dtype=np.float64)
    return values.reshape(values.shape[0], -1).astype(np.float64)


def centering(n: int) -> np.ndarray:
    return np.eye(n) - np.ones((n, n)) / n


def hsic(k: np.ndarray, l: np.ndarray) -> float:
    """Biased estimator tr(K·H·L·H) / (n - 1)²."""
    n = k.shape[0]
    h = centering(n)
    return float(np.trace(k @ h @ l @ h)) / (n - 1) ** 2


def _has_variance(values: np.ndarray) -> bool:
    spread = np.abs(values - values.mean(axis=0)).max()
    return bool(spread > 1e-12 * max(1.0, float(np.abs(values).max())))


def linear_cka(x: Matrix, y: Matrix) -> float:
    """Linear CKA: HSIC(K, L) / √(HSIC(K, K)·HSIC(L, L)) with K = X·Xᵀ, L = Y·Yᵀ."""
    if isinstance(x, EmbeddingMatrix) and isinstance(y, EmbeddingMatrix) and x.frame_ids != y.frame_ids:
        raise AnalysisError("CKA needs both matrices in the same frame order")
    a, b = _values(x), _values(y)
    if a.shape[0] != b.shape[0]:
        raise AnalysisError(f"CKA needs equal row counts, got {a.shape[0]} and {b.shape[0]}")
    if a.shape[0] < 2:
        raise AnalysisError("CKA needs at least 2 rows")
    if not _has_variance(a) or not _has_variance(b):
        raise AnalysisError("CKA is undefined for zero-variance inputs")
    k, l = a @ a.T, b @ b.T
    denominator = np.sqrt(hsic(k, k) * hsic(l, l))
    return float(min(1.0, max(0.0, hsic(k, l) / denominator)))


def cka_grid(matrices: Mapping[str, Matrix]) -> Tuple[List[str], np.ndarray]:
    """Pairwise CKA of named embedding sets; symmetric with a unit diagonal."""
    names = list(matrices)
    grid = np.eye(len(names))
    for i, first in enumerate(names):
        for j in range(i + 1, len(names)):
            grid[i, j] = grid[j, i] = linear_cka(matrices[first], matrices[names[j]])
    logger.info("CKA grid over %d embedding sets", len(names))
    return names, grid


def grid_rows(names: List[str], grid: np.ndarray) -> List[Dict[str, object]]:
    """CSV view of a CKA grid: one row per method."""
    return [
        {"method": name, **{other: float(grid[i, j]) for j, other in enumerate(names)}}
        for i, name in enumerate(names)
    ]
