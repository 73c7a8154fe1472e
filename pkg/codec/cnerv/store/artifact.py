from cnerv.compression import CompressedArtifact, decode_artifact, encode_artifact
from .base import StoreBase


class StoreArtifact(StoreBase[CompressedArtifact]):
    """Compressed `.cnrv` containers."""

    suffix = ".cnrv"

    def encode(self, obj: CompressedArtifact) -> bytes:
        data, _ = encode_artifact(obj)
        return data

    def decode(self, data: bytes) -> CompressedArtifact:
        return decode_artifact(data)


artifact = StoreArtifact()
