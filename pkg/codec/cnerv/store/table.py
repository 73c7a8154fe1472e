from cnerv.analysis import EmbeddingMatrix, decode_table, encode_table
from .base import StoreBase


class StoreEmbeddingTable(StoreBase[EmbeddingMatrix]):
    """Embedding matrices in the binary table format."""

    suffix = ".cnem"

    def encode(self, obj: EmbeddingMatrix) -> bytes:
        return encode_table(obj)

    def decode(self, data: bytes) -> EmbeddingMatrix:
        return decode_table(data)


embedding_table = StoreEmbeddingTable()
