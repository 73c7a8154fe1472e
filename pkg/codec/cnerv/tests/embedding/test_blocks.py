import numpy as np
import pytest
from cnerv.core.errors import ShapeError
from cnerv.embedding import assemble, partition
from cnerv.tests.utils import random_array


@pytest.mark.parametrize("execution_number", range(3))
def test_partition_assemble(execution_number: int) -> None:
    """Blocks hold the expected pixels and assembling them restores the image exactly."""
    image = random_array((3, 8, 12))
    grid = partition(image, 2, 3)
    assert grid.blocks.shape == (6, 3, 4, 4), "M·N blocks of (C, H/M, W/N)"
    for m in range(2):
        for n in range(3):
            assert np.array_equal(grid.blocks[m * 3 + n], image[:, m * 4:(m + 1) * 4, n * 4:(n + 1) * 4]), (
                "Block (m, n) covers rows m·H/M.. and cols n·W/N.."
            )
    assert grid.grid().shape == (2, 3, 3, 4, 4), "Grid view is (M, N, C, h, w)"
    assert np.array_equal(assemble(grid), image), "assemble inverts partition"


def test_partition_errors() -> None:
    """Frame extents must be divisible by the grid."""
    with pytest.raises(ShapeError):
        partition(random_array((3, 9, 12)), 2, 3)
    with pytest.raises(ShapeError):
        partition(random_array((3, 8, 10)), 2, 3)
    with pytest.raises(ShapeError):
        partition(random_array((8, 12)), 2, 3)
