import threading
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple
import numpy as np
from cnerv.core.errors import NonFiniteError, ShapeError, TapeError

BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_PRECISIONS = {"single": np.float32, "double": np.float64}
_local = threading.local()


def _tape_stack() -> List["GradTape"]:
    if not hasattr(_local, "tapes"):
        _local.tapes = []
    return _local.tapes


def default_dtype() -> np.dtype:
    """Floating point type of newly created tensors in the current thread."""
    return np.dtype(getattr(_local, "dtype", np.float64))


@contextmanager
def precision(name: str) -> Iterator[None]:
    """Temporarily switch the default dtype ("single" or "double")."""
    if name not in _PRECISIONS:
        raise ValueError(f"Unknown precision '{name}', expected one of {sorted(_PRECISIONS)}")
    previous = getattr(_local, "dtype", np.float64)
    _local.dtype = _PRECISIONS[name]
    try:
        yield
    finally:
        _local.dtype = previous


class Tensor:
    """Dense row-major array with optional gradient tracking.

    The data array is not modified by operations; only the trainer writes
    parameter values in place between steps, and only `backward` writes
    into `grad`.
    """

    def __init__(self, data: Any, requires_grad: bool = False, dtype: Optional[Any] = None):
        array = np.asarray(data, dtype=dtype if dtype is not None else default_dtype())
        # ascontiguousarray would promote 0-d scalars to shape (1,)
        self.data: np.ndarray = array if array.flags.c_contiguous else np.ascontiguousarray(array)
        if any(extent <= 0 for extent in self.data.shape):
            raise ShapeError(f"Tensor extents must be positive, got {self.data.shape}")
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = np.zeros_like(self.data) if requires_grad else None
        self.is_leaf = True
        self._tape: Optional["GradTape"] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, tensor has shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy(), dtype=self.data.dtype)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad.fill(0)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype}{flag})"

    # Operator sugar; implementations live in cnerv.tensor.ops
    def __add__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.div(self, other)

    def __rtruediv__(self, other: Any) -> "Tensor":
        from cnerv.tensor import ops
        return ops.div(other, self)

    def __neg__(self) -> "Tensor":
        from cnerv.tensor import ops
        return ops.mul(self, -1.0)


class _Node:
    __slots__ = ("inputs", "output", "backward")

    def __init__(self, inputs: Sequence[Tensor], output: Tensor, backward: BackwardFn):
        self.inputs = tuple(inputs)
        self.output = output
        self.backward = backward


class GradTape:
    """Ordered record of executed operations.

    Usage::

        with GradTape() as tape:
            loss = objective(model(x), target)
        tape.backward(loss)

    One tape per thread; tapes nest, the innermost one records.
    """

    def __init__(self) -> None:
        self.nodes: List[_Node] = []

    def __enter__(self) -> "GradTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(self, node: _Node) -> None:
        self.nodes.append(node)

    def backward(self, loss: Tensor) -> None:
        """Accumulate d(loss)/d(leaf) into every leaf that requires grad.
        :param loss: single element tensor produced while this tape was recording
        """
        if loss.size != 1:
            raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if loss._tape is not self:
            raise TapeError("Loss was not produced under this tape (nothing to differentiate)")
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for node in reversed(self.nodes):
            grad_out = grads.pop(id(node.output), None)
            if grad_out is None:
                continue
            for tensor, grad_in in zip(node.inputs, node.backward(grad_out)):
                if grad_in is None or not tensor.requires_grad:
                    continue
                if tensor.is_leaf:
                    assert tensor.grad is not None
                    tensor.grad += grad_in.astype(tensor.grad.dtype, copy=False)
                elif id(tensor) in grads:
                    grads[id(tensor)] = grads[id(tensor)] + grad_in
                else:
                    grads[id(tensor)] = grad_in


def active_tape() -> Optional[GradTape]:
    stack = _tape_stack()
    return stack[-1] if stack else None


def backward(loss: Tensor) -> None:
    """Run the backward pass of the tape that produced `loss`."""
    if loss.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if loss._tape is None:
        raise TapeError("Loss was produced without an active GradTape")
    loss._tape.backward(loss)


def make_result(data: np.ndarray, inputs: Sequence[Tensor], backward_fn: BackwardFn, name: str) -> Tensor:
    """Wrap the output of a forward kernel and record it on the active tape."""
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{name} produced non-finite values")
    out = Tensor(data, dtype=data.dtype)
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.is_leaf = False
        out._tape = tape
        tape.record(_Node(inputs, out, backward_fn))
    return out
