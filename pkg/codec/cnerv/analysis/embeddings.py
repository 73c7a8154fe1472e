from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence
import numpy as np
from cnerv.compression.bitstream import Reader, Writer
from cnerv.core.errors import AnalysisError, BitstreamError
from cnerv.data import FrameDataset
from cnerv.embedding import encode_image, positional_encoding
from cnerv.trainer import TrainState, frame_times, split

TABLE_MAGIC = b"CNEM"
LABELS = ("seen", "unseen", "all")


@dataclass
class EmbeddingMatrix:
    """One flattened embedding per row, rows in temporal (frame id) order."""
    values: np.ndarray
    frame_ids: List[int]
    labels: List[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise AnalysisError(f"embedding matrix must be 2-D, got shape {self.values.shape}")
        if len(self.frame_ids) != self.values.shape[0] or len(self.labels) != self.values.shape[0]:
            raise AnalysisError("every row needs a frame id and a split label")
        if any(b <= a for a, b in zip(self.frame_ids, self.frame_ids[1:])):
            raise AnalysisError("rows must follow increasing frame order")
        unknown = set(self.labels) - set(LABELS)
        if unknown:
            raise AnalysisError(f"unknown split labels {sorted(unknown)}")

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    def subset(self, label: Optional[str]) -> "EmbeddingMatrix":
        """Rows of one split; None keeps every row."""
        if label is None:
            return self
        keep = [i for i, row_label in enumerate(self.labels) if row_label == label]
        return EmbeddingMatrix(
            self.values[keep], [self.frame_ids[i] for i in keep], [self.labels[i] for i in keep]
        )

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[np.ndarray],
        frame_ids: Sequence[int],
        labels: Sequence[str]
    ) -> "EmbeddingMatrix":
        values = np.stack([np.asarray(row, dtype=np.float64).reshape(-1) for row in rows])
        return cls(values, list(frame_ids), list(labels))


def embedding_matrix(state: TrainState, dataset: FrameDataset) -> EmbeddingMatrix:
    """Input embedding of every frame: encoder output for CNeRV, positional encoding for NeRV."""
    parts = split(len(dataset), state.split_spec)
    unseen = set(parts.unseen)
    labels = ["unseen" if i in unseen else "seen" for i in range(len(dataset))]
    config = state.config
    if config.kind == "cnerv":
        params = state.params
        rows = [
            encode_image(
                dataset[i], config.cae, params["encoder.reducer.weight"], params["encoder.reducer.bias"]
            ).values.data
            for i in range(len(dataset))
        ]
    else:
        times = frame_times(len(dataset), state.split_spec)
        rows = [positional_encoding(times[i], config.pos) for i in range(len(dataset))]
    return EmbeddingMatrix.from_rows(rows, list(range(len(dataset))), labels)


def encode_table(matrix: EmbeddingMatrix) -> bytes:
    """b"CNEM" | u32 rows | u32 cols | per row: u32 frame id, u8 label index | rows·cols f64 values."""
    out = Writer()
    out.raw(TABLE_MAGIC)
    out.u32(matrix.rows)
    out.u32(int(matrix.values.shape[1]))
    for frame_id, label in zip(matrix.frame_ids, matrix.labels):
        out.u32(frame_id)
        out.u8(LABELS.index(label))
    out.raw(np.ascontiguousarray(matrix.values, dtype="<f8").tobytes())
    return out.getvalue()


def decode_table(data: bytes) -> EmbeddingMatrix:
    reader = Reader(data)
    if reader.raw(4) != TABLE_MAGIC:
        raise BitstreamError("not an embedding table (bad magic)")
    rows, cols = reader.u32(), reader.u32()
    frame_ids, labels = [], []
    for _ in range(rows):
        frame_ids.append(reader.u32())
        index = reader.u8()
        if index >= len(LABELS):
            raise BitstreamError(f"unknown split label index {index}")
        labels.append(LABELS[index])
    values = np.frombuffer(reader.raw(rows * cols * 8), dtype="<f8").reshape(rows, cols).astype(np.float64)
    reader.expect_end()
    return EmbeddingMatrix(values, frame_ids, labels)


def table_rows(matrix: EmbeddingMatrix) -> List[Dict[str, Any]]:
    """CSV view: frame_id, split, e0, e1, ..."""
    return [
        {"frame_id": frame_id, "split": label, **{f"e{j}": float(v) for j, v in enumerate(row)}}
        for frame_id, label, row in zip(matrix.frame_ids, matrix.labels, matrix.values)
    ]
