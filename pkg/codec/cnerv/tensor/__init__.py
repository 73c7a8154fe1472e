from .tensor import GradTape, Tensor, active_tape, backward, default_dtype, precision
from . import ops
