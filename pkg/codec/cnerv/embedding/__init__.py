from .blocks import BlockGrid, assemble, partition
from .encoding import (
    EmbeddingGrid, content_adaptive_embedding, cosine_basis, encode_image, frame_time,
    positional_encoding, raw_embedding
)
