import numpy as np
import pytest
from cnerv.core.errors import NonFiniteError, ShapeError, UnsupportedKernelError
from cnerv.objective import gaussian_window
from cnerv.tensor import Tensor, ops
from cnerv.tests.utils import gradient_error, random_array, random_shape

TOLERANCE = 1e-4


def weighted_sum(x: Tensor) -> Tensor:
    """Scalar with a non-uniform gradient: Σ w·x for fixed random w."""
    weights = Tensor(np.linspace(-1.0, 2.0, x.size).reshape(x.shape))
    return ops.sum(ops.mul(x, weights))


def conv_reference(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int, padding: int) -> np.ndarray:
    """Direct seven-loop cross-correlation."""
    c_out, c_in, k, _ = w.shape
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    h_out = (xp.shape[1] - k) // stride + 1
    w_out = (xp.shape[2] - k) // stride + 1
    out = np.zeros((c_out, h_out, w_out))
    for o in range(c_out):
        for i in range(h_out):
            for j in range(w_out):
                total = b[o]
                for c in range(c_in):
                    for u in range(k):
                        for v in range(k):
                            total += w[o, c, u, v] * xp[c, i * stride + u, j * stride + v]
                out[o, i, j] = total
    return out


@pytest.mark.parametrize("execution_number", range(3))
def test_elementwise_gradients(execution_number: int) -> None:
    """Finite differences agree with the recorded gradients of the binary operators."""
    shape = random_shape(3)
    a = Tensor(random_array(shape), requires_grad=True)
    b = Tensor(random_array(shape, 0.5, 2.0), requires_grad=True)
    for op in (ops.add, ops.sub, ops.mul, ops.div):
        error = gradient_error(lambda: weighted_sum(op(a, b)), [a, b])
        assert error < TOLERANCE, f"Relative gradient error of {op.__name__}"


def test_scalar_broadcast_gradients() -> None:
    """A shape-() operand receives the summed gradient."""
    x = Tensor(random_array((2, 3)), requires_grad=True)
    s = Tensor(np.asarray(1.7), requires_grad=True)
    assert gradient_error(lambda: weighted_sum(ops.mul(x, s)), [x, s]) < TOLERANCE, "Scalar times tensor"
    assert gradient_error(lambda: weighted_sum(ops.div(s, x + 3.0)), [x, s]) < TOLERANCE, "Scalar over tensor"


@pytest.mark.parametrize("execution_number", range(3))
def test_unary_gradients(execution_number: int) -> None:
    """Finite differences agree for abs, gelu, mean, reshape, permute and concat."""
    x = Tensor(random_array((2, 3, 4)), requires_grad=True)
    y = Tensor(random_array((2, 1, 4)), requires_grad=True)
    cases = {
        "abs": lambda: weighted_sum(ops.absolute(x)),
        "gelu": lambda: weighted_sum(ops.gelu(x)),
        "mean": lambda: ops.mean(ops.mul(x, x)),
        "reshape": lambda: weighted_sum(ops.reshape(x, (4, 6))),
        "permute": lambda: weighted_sum(ops.permute(x, (2, 0, 1))),
        "concat": lambda: weighted_sum(ops.concat([x, y], axis=1)),
    }
    for name, fn in cases.items():
        inputs = [x, y] if name == "concat" else [x]
        assert gradient_error(fn, inputs) < TOLERANCE, f"Relative gradient error of {name}"


def test_linear_gradient() -> None:
    """Finite differences agree for y = W·x + b."""
    x = Tensor(random_array((5,)), requires_grad=True)
    w = Tensor(random_array((3, 5)), requires_grad=True)
    b = Tensor(random_array((3,)), requires_grad=True)
    out = ops.linear(x, w, b)
    assert np.allclose(out.data, w.data @ x.data + b.data, atol=1e-12), "Forward value of linear"
    assert gradient_error(lambda: weighted_sum(ops.gelu(ops.linear(x, w, b))), [x, w, b]) < TOLERANCE, (
        "Relative gradient error of linear"
    )


@pytest.mark.parametrize("k,stride,padding", [(1, 1, None), (3, 1, None), (3, 2, 1), (3, 1, 0)])
def test_conv2d_matches_loops(k: int, stride: int, padding: int) -> None:
    """conv2d equals the direct loop implementation to 1e-12."""
    x = random_array((3, 5, 6))
    w = random_array((4, 3, k, k))
    b = random_array((4,))
    out = ops.conv2d(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=padding)
    expected = conv_reference(x, w, b, stride, k // 2 if padding is None else padding)
    assert out.shape == expected.shape, "Output extent follows (H + 2p - k) / stride + 1"
    assert np.max(np.abs(out.data - expected)) < 1e-12, "Same values as the loop oracle"


@pytest.mark.parametrize("k,stride", [(1, 1), (3, 1), (3, 2)])
def test_conv2d_gradient(k: int, stride: int) -> None:
    """Finite differences agree for input, weight and bias of conv2d."""
    x = Tensor(random_array((2, 5, 4)), requires_grad=True)
    w = Tensor(random_array((3, 2, k, k)), requires_grad=True)
    b = Tensor(random_array((3,)), requires_grad=True)
    error = gradient_error(lambda: weighted_sum(ops.conv2d(x, w, b, stride=stride)), [x, w, b])
    assert error < TOLERANCE, "Relative gradient error of conv2d"


def test_conv2d_errors() -> None:
    """Unsupported kernels and mismatched channels are rejected."""
    x = Tensor(random_array((2, 5, 5)))
    with pytest.raises(UnsupportedKernelError):
        ops.conv2d(x, Tensor(random_array((1, 2, 5, 5))))
    with pytest.raises(UnsupportedKernelError):
        ops.conv2d(x, Tensor(random_array((1, 2, 2, 2))))
    with pytest.raises(ShapeError):
        ops.conv2d(x, Tensor(random_array((1, 3, 3, 3))))
    with pytest.raises(ShapeError):
        ops.conv2d(x, Tensor(random_array((1, 2, 3, 3))), Tensor(random_array((2,))))


def test_pixel_shuffle_layout() -> None:
    """out[c, h·r+i, w·r+j] = in[c·r²+i·r+j, h, w] and unshuffle inverts it."""
    r, c, h, w = 2, 3, 2, 3
    x = np.arange(c * r * r * h * w, dtype=np.float64).reshape(c * r * r, h, w)
    out = ops.pixel_shuffle(Tensor(x), r).data
    assert out.shape == (c, h * r, w * r), "Channels fold into space"
    for ch in range(c):
        for y in range(h):
            for z in range(w):
                for i in range(r):
                    for j in range(r):
                        assert out[ch, y * r + i, z * r + j] == x[ch * r * r + i * r + j, y, z], (
                            "Element placement of pixel shuffle"
                        )
    assert np.array_equal(ops.pixel_unshuffle(Tensor(out), r).data, x), "Unshuffle is the exact inverse"


def test_pixel_shuffle_gradient() -> None:
    """Finite differences agree for pixel shuffle and unshuffle."""
    x = Tensor(random_array((8, 2, 3)), requires_grad=True)
    y = Tensor(random_array((2, 4, 6)), requires_grad=True)
    assert gradient_error(lambda: weighted_sum(ops.pixel_shuffle(x, 2)), [x]) < TOLERANCE, "Pixel shuffle"
    assert gradient_error(lambda: weighted_sum(ops.pixel_unshuffle(y, 2)), [y]) < TOLERANCE, "Pixel unshuffle"
    with pytest.raises(ShapeError):
        ops.pixel_shuffle(Tensor(random_array((6, 2, 2))), 2)


def test_separable_filter() -> None:
    """Valid-mode filtering equals the explicit window sum and differentiates correctly."""
    kernel = gaussian_window(3, 1.0)
    data = random_array((2, 6, 7))
    out = ops.separable_filter(Tensor(data), kernel).data
    assert out.shape == (2, 4, 5), "Valid mode shrinks by k - 1"
    window = np.outer(kernel, kernel)
    expected = data[1, 2:5, 3:6] * window
    assert abs(out[1, 2, 3] - expected.sum()) < 1e-12, "One output equals the weighted window sum"
    x = Tensor(data, requires_grad=True)
    assert gradient_error(lambda: weighted_sum(ops.separable_filter(x, kernel)), [x]) < TOLERANCE, (
        "Relative gradient error of the separable filter"
    )


def test_shape_errors() -> None:
    """Only scalar broadcasting is allowed and extents must be positive."""
    with pytest.raises(ShapeError):
        ops.add(Tensor(np.zeros((2, 3))), Tensor(np.zeros((3, 2))))
    with pytest.raises(ShapeError):
        ops.mul(Tensor(np.zeros((2, 3))), Tensor(np.zeros((1, 3))))
    with pytest.raises(ShapeError):
        Tensor(np.zeros((0, 3)))
    with pytest.raises(ShapeError):
        ops.reshape(Tensor(np.zeros((2, 3))), (4, 2))
    with pytest.raises(ShapeError):
        ops.linear(Tensor(np.zeros(4)), Tensor(np.zeros((3, 5))))


def test_non_finite_result() -> None:
    """An operator producing infinity or NaN raises instead of propagating it."""
    with np.errstate(all="ignore"):
        with pytest.raises(NonFiniteError):
            ops.div(Tensor(np.ones(3)), Tensor(np.zeros(3)))
        with pytest.raises(NonFiniteError):
            ops.mul(Tensor(np.full(2, 1e300)), 1e300)
