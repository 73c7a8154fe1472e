"""Exceptions raised by the codec library.

Every error carries a descriptive message; the command line layer turns
them into exit statuses (see `cnerv.cli.deps.CommandError`).
"""
from typing import Optional


class CNeRVError(Exception):
    """Base class of all library errors."""


class ShapeError(CNeRVError):
    """Operand shapes are incompatible with the requested operation."""


class UnsupportedKernelError(CNeRVError):
    """Convolution kernel size outside of the supported set."""


class NonFiniteError(CNeRVError):
    """A forward operation produced NaN or infinity."""


class TapeError(CNeRVError):
    """Backward pass requested without a recorded tape."""


class ConfigError(CNeRVError):
    """Configuration values are inconsistent with each other."""


class SplitError(CNeRVError):
    """Seen/unseen partition cannot be built."""


class FrameTimeError(CNeRVError):
    """Normalized frame index lies outside [0, 1]."""


class TrainingDivergedError(CNeRVError):
    """Loss became non-finite during optimization."""

    def __init__(self, step: int, detail: str):
        super().__init__(f"Training diverged at step {step}: {detail}")
        self.step = step


class ModelKindError(CNeRVError):
    """Operation is not defined for the given model kind."""


class InterpolationError(CNeRVError):
    """Embedding interpolation prerequisites are not met."""


class QuantizationError(CNeRVError):
    """Tensor cannot be quantized."""


class CodecChecksumError(CNeRVError):
    """Entropy coded payload failed its CRC32 check."""


class BitstreamError(CNeRVError):
    """Container bytes do not follow the .cnrv layout."""


class DigestMismatchError(CNeRVError):
    """Embeddings were produced by a different model than the one given."""


class FrameIOError(CNeRVError):
    """A frame file cannot be read, decoded or written."""

    def __init__(self, detail: str, path: Optional[str] = None):
        super().__init__(f"{path}: {detail}" if path else detail)
        self.path = path


class AnalysisError(CNeRVError):
    """Embedding statistics are undefined for the given input."""
