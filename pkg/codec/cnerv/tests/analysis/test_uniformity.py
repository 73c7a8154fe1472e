import itertools
import math
from typing import List, Optional
import numpy as np
import pytest
from cnerv.analysis import EmbeddingMatrix, neighbor_distance, normalize_rows, normalized_distance, uniformity
from cnerv.core.errors import AnalysisError
from cnerv.schemas import UniformityConfig
from cnerv.tests.utils import random_array


def matrix(values: np.ndarray, labels: Optional[List[str]] = None) -> EmbeddingMatrix:
    n = len(values)
    return EmbeddingMatrix(values, list(range(n)), labels or ["seen"] * n)


def test_uniformity_extremes() -> None:
    """Collapsed rows give 0, an antipodal pair gives -4t."""
    assert uniformity(matrix(np.ones((4, 3)))) == pytest.approx(0.0), "Collapsed"
    assert uniformity(matrix(np.array([[1.0, 0.0], [-1.0, 0.0]]))) == pytest.approx(-8.0), "Antipodal"


@pytest.mark.parametrize("execution_number", range(3))
def test_uniformity_matches_pair_loop(execution_number: int) -> None:
    """Agrees with a direct loop over distinct pairs."""
    values = random_array((7, 4))
    rows = normalize_rows(values)
    terms = [
        math.exp(-2.0 * float(np.sum((rows[i] - rows[j]) ** 2))) for i, j in itertools.combinations(range(7), 2)
    ]
    assert uniformity(matrix(values)) == pytest.approx(math.log(np.mean(terms)), abs=1e-10), "Pair loop"


def test_uniformity_variants() -> None:
    """The norm-difference variant and the split restriction."""
    values = np.array([[3.0, 4.0], [0.0, 1.0], [0.0, 2.0]])
    literal = UniformityConfig(literal=True)
    assert uniformity(matrix(values), literal) == pytest.approx(0.0), "Unit norms after normalization"
    raw = UniformityConfig(literal=True, normalize=False)
    expected = math.log(np.mean(np.exp(-2.0 * np.array([16.0, 9.0, 1.0]))))
    assert uniformity(matrix(values), raw) == pytest.approx(expected), "Norm differences"
    labelled = matrix(values, ["seen", "unseen", "unseen"])
    only_unseen = uniformity(labelled, UniformityConfig(normalize=False), split="unseen")
    assert only_unseen == pytest.approx(-2.0), "Rows 1 and 2 only"
    with pytest.raises(AnalysisError):
        uniformity(labelled, split="seen")


def test_neighbor_distances() -> None:
    """Alternating rows are as far apart as possible for their neighbors."""
    alternating = matrix(np.array([[1.0, 0.0], [-1.0, 0.0]] * 3))
    assert neighbor_distance(alternating) == pytest.approx(2.0), "Consecutive rows are antipodal"
    # 9 of the 15 pairs are antipodal
    assert normalized_distance(alternating) == pytest.approx(2.0 / (18.0 / 15.0)), "Relative to all pairs"
    assert normalized_distance(matrix(np.zeros((3, 2)))) == 0.0, "All-zero rows"
    assert neighbor_distance(matrix(np.array([[0.0, 1.0], [0.0, 3.0]])), normalize=False) == 2.0, "Raw rows"
