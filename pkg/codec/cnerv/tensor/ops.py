"""Differentiable operators over `Tensor`.

Shapes are explicit: binary elementwise operators require equal shapes,
the only broadcast allowed is a scalar (Python number or shape-() tensor)
against a tensor. Every operator records its backward closure on the
active `GradTape`.
"""
import math
from typing import List, Optional, Sequence, Tuple, Union
import numpy as np
from cnerv.core.errors import ShapeError, UnsupportedKernelError
from cnerv.tensor.tensor import Tensor, make_result

Operand = Union[Tensor, float, int]

SUPPORTED_KERNELS = (1, 3)
# tanh approximation of GELU
GELU_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
GELU_CUBIC = 0.044715


def _as_pair(a: Operand, b: Operand, name: str) -> Tuple[Tensor, Tensor, Tuple[int, ...]]:
    if not isinstance(a, Tensor) and not isinstance(b, Tensor):
        raise TypeError(f"{name} needs at least one Tensor operand")
    if not isinstance(a, Tensor):
        a = Tensor(np.asarray(a, dtype=b.dtype), dtype=b.dtype)  # type: ignore
    if not isinstance(b, Tensor):
        b = Tensor(np.asarray(b, dtype=a.dtype), dtype=a.dtype)
    if a.shape == b.shape:
        return a, b, a.shape
    if a.shape == ():
        return a, b, b.shape
    if b.shape == ():
        return a, b, a.shape
    raise ShapeError(f"{name}: shape mismatch {a.shape} vs {b.shape} (only scalar broadcasting is allowed)")


def _reduce_to(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    return np.asarray(grad.sum(), dtype=grad.dtype).reshape(shape)


def add(a: Operand, b: Operand) -> Tensor:
    ta, tb, _ = _as_pair(a, b, "add")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return _reduce_to(g, ta.shape), _reduce_to(g, tb.shape)

    return make_result(ta.data + tb.data, (ta, tb), backward, "add")


def sub(a: Operand, b: Operand) -> Tensor:
    ta, tb, _ = _as_pair(a, b, "sub")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return _reduce_to(g, ta.shape), _reduce_to(-g, tb.shape)

    return make_result(ta.data - tb.data, (ta, tb), backward, "sub")


def mul(a: Operand, b: Operand) -> Tensor:
    ta, tb, _ = _as_pair(a, b, "mul")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return _reduce_to(g * tb.data, ta.shape), _reduce_to(g * ta.data, tb.shape)

    return make_result(ta.data * tb.data, (ta, tb), backward, "mul")


def div(a: Operand, b: Operand) -> Tensor:
    ta, tb, _ = _as_pair(a, b, "div")
    out = ta.data / tb.data

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return _reduce_to(g / tb.data, ta.shape), _reduce_to(-g * out / tb.data, tb.shape)

    return make_result(out, (ta, tb), backward, "div")


def absolute(x: Tensor) -> Tensor:
    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (g * np.sign(x.data),)

    return make_result(np.abs(x.data), (x,), backward, "abs")


def gelu(x: Tensor) -> Tensor:
    """GELU with the tanh approximation
    0.5·x·(1 + tanh(√(2/π)·(x + 0.044715·x³))).
    """
    u = GELU_SQRT_2_OVER_PI * (x.data + GELU_CUBIC * x.data ** 3)
    t = np.tanh(u)

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        du = GELU_SQRT_2_OVER_PI * (1.0 + 3.0 * GELU_CUBIC * x.data ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * x.data * (1.0 - t * t) * du),)

    return make_result(0.5 * x.data * (1.0 + t), (x,), backward, "gelu")


def sum(x: Tensor) -> Tensor:  # noqa: A001
    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.full(x.shape, g.reshape(-1)[0], dtype=x.dtype),)

    return make_result(np.asarray(x.data.sum(), dtype=x.dtype), (x,), backward, "sum")


def mean(x: Tensor) -> Tensor:
    n = x.size

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.full(x.shape, g.reshape(-1)[0] / n, dtype=x.dtype),)

    return make_result(np.asarray(x.data.mean(), dtype=x.dtype), (x,), backward, "mean")


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    shape = tuple(int(s) for s in shape)
    if int(np.prod(shape)) != x.size:
        raise ShapeError(f"reshape: cannot view {x.shape} as {shape}")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (g.reshape(x.shape),)

    return make_result(x.data.reshape(shape), (x,), backward, "reshape")


def permute(x: Tensor, axes: Sequence[int]) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.data.ndim)):
        raise ShapeError(f"permute: {axes} is not a permutation of the {x.data.ndim} axes of {x.shape}")
    inverse = tuple(np.argsort(axes))

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.ascontiguousarray(g.transpose(inverse)),)

    return make_result(np.ascontiguousarray(x.data.transpose(axes)), (x,), backward, "permute")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("concat: empty tensor list")
    ref = tensors[0].shape
    for t in tensors[1:]:
        if len(t.shape) != len(ref) or any(
            a != b for i, (a, b) in enumerate(zip(t.shape, ref)) if i != axis
        ):
            raise ShapeError(f"concat: {t.shape} does not match {ref} outside axis {axis}")
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return tuple(np.split(g, bounds, axis=axis))

    return make_result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward, "concat")


def linear(x: Tensor, weight: Tensor, bias: Optional[Tensor] = None) -> Tensor:
    """y = W·x + b for a vector x of length n and W of shape (m, n)."""
    if len(x.shape) != 1 or len(weight.shape) != 2 or weight.shape[1] != x.shape[0]:
        raise ShapeError(f"linear: input {x.shape} incompatible with weight {weight.shape}")
    if bias is not None and bias.shape != (weight.shape[0],):
        raise ShapeError(f"linear: bias {bias.shape} must be ({weight.shape[0]},)")
    out = weight.data @ x.data
    if bias is not None:
        out = out + bias.data
    inputs: List[Tensor] = [x, weight] + ([bias] if bias is not None else [])

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        grads = [weight.data.T @ g, np.outer(g, x.data)]
        if bias is not None:
            grads.append(g)
        return grads

    return make_result(out, inputs, backward, "linear")


def conv2d(
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: Optional[int] = None
) -> Tensor:
    """Cross-correlation of a (Cin, H, W) input with a (Cout, Cin, k, k) weight.
    :param padding: zero padding on every side, defaults to k // 2 (same size at stride 1)
    """
    if len(x.shape) != 3 or len(weight.shape) != 4:
        raise ShapeError(f"conv2d: expected (Cin,H,W) input and 4-d weight, got {x.shape} and {weight.shape}")
    c_out, c_in, kh, kw = weight.shape
    if kh != kw or kh not in SUPPORTED_KERNELS:
        raise UnsupportedKernelError(f"conv2d: kernel {kh}x{kw} is not supported, use one of {SUPPORTED_KERNELS}")
    if x.shape[0] != c_in:
        raise ShapeError(f"conv2d: input has {x.shape[0]} channels, weight expects {c_in}")
    if bias is not None and bias.shape != (c_out,):
        raise ShapeError(f"conv2d: bias {bias.shape} must be ({c_out},)")
    k = kh
    p = k // 2 if padding is None else padding
    _, h, w = x.shape
    h_out = (h + 2 * p - k) // stride + 1
    w_out = (w + 2 * p - k) // stride + 1
    if h_out < 1 or w_out < 1:
        raise ShapeError(f"conv2d: input {x.shape} too small for kernel {k} with padding {p}")
    xp = np.pad(x.data, ((0, 0), (p, p), (p, p))) if p else x.data
    h_span = stride * (h_out - 1) + 1
    w_span = stride * (w_out - 1) + 1
    out = np.zeros((c_out, h_out, w_out), dtype=x.dtype)
    for i in range(k):
        for j in range(k):
            patch = xp[:, i:i + h_span:stride, j:j + w_span:stride]
            out += np.tensordot(weight.data[:, :, i, j], patch, axes=(1, 0))
    if bias is not None:
        out += bias.data[:, None, None]
    inputs: List[Tensor] = [x, weight] + ([bias] if bias is not None else [])

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        gxp = np.zeros_like(xp)
        gw = np.zeros_like(weight.data)
        for i in range(k):
            for j in range(k):
                patch = xp[:, i:i + h_span:stride, j:j + w_span:stride]
                gw[:, :, i, j] = np.tensordot(g, patch, axes=([1, 2], [1, 2]))
                gxp[:, i:i + h_span:stride, j:j + w_span:stride] += np.tensordot(
                    weight.data[:, :, i, j], g, axes=(0, 0)
                )
        grads = [gxp[:, p:p + h, p:p + w], gw]
        if bias is not None:
            grads.append(g.sum(axis=(1, 2)))
        return grads

    return make_result(out, inputs, backward, "conv2d")


def _shuffle(data: np.ndarray, r: int) -> np.ndarray:
    c, h, w = data.shape
    return data.reshape(c // (r * r), r, r, h, w).transpose(0, 3, 1, 4, 2).reshape(c // (r * r), h * r, w * r)


def _unshuffle(data: np.ndarray, r: int) -> np.ndarray:
    c, h, w = data.shape
    return data.reshape(c, h // r, r, w // r, r).transpose(0, 2, 4, 1, 3).reshape(c * r * r, h // r, w // r)


def pixel_shuffle(x: Tensor, r: int) -> Tensor:
    """(C·r², H, W) -> (C, r·H, r·W) with out[c, h·r+i, w·r+j] = in[c·r²+i·r+j, h, w]."""
    if len(x.shape) != 3 or r < 1 or x.shape[0] % (r * r):
        raise ShapeError(f"pixel_shuffle: {x.shape[0] if x.shape else 0} channels not divisible by r²={r * r}")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.ascontiguousarray(_unshuffle(g, r)),)

    return make_result(np.ascontiguousarray(_shuffle(x.data, r)), (x,), backward, "pixel_shuffle")


def pixel_unshuffle(x: Tensor, r: int) -> Tensor:
    """Inverse of `pixel_shuffle`."""
    if len(x.shape) != 3 or r < 1 or x.shape[1] % r or x.shape[2] % r:
        raise ShapeError(f"pixel_unshuffle: spatial dims of {x.shape} not divisible by r={r}")

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.ascontiguousarray(_shuffle(g, r)),)

    return make_result(np.ascontiguousarray(_unshuffle(x.data, r)), (x,), backward, "pixel_unshuffle")


def band_matrix(size: int, kernel: np.ndarray) -> np.ndarray:
    """Matrix applying a 1-d kernel in 'valid' mode along an axis of length `size`."""
    k = kernel.shape[0]
    rows = size - k + 1
    mat = np.zeros((rows, size), dtype=kernel.dtype)
    for t in range(k):
        mat[np.arange(rows), np.arange(rows) + t] = kernel[t]
    return mat


def separable_filter(x: Tensor, kernel: np.ndarray) -> Tensor:
    """Per-channel 'valid' 2-d filtering of (C, H, W) with the outer product of a 1-d kernel."""
    if len(x.shape) != 3:
        raise ShapeError(f"separable_filter: expected (C,H,W), got {x.shape}")
    _, h, w = x.shape
    k = kernel.shape[0]
    if k > h or k > w:
        raise ShapeError(f"separable_filter: window {k} larger than image {h}x{w}")
    kernel = kernel.astype(x.dtype)
    kh = band_matrix(h, kernel)
    kw = band_matrix(w, kernel)

    def backward(g: np.ndarray) -> Sequence[Optional[np.ndarray]]:
        return (np.matmul(np.matmul(kh.T, g), kw),)

    return make_result(np.matmul(np.matmul(kh, x.data), kw.T), (x,), backward, "separable_filter")
