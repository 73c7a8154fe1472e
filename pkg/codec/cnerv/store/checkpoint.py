from cnerv.compression import decode_checkpoint, encode_checkpoint
from cnerv.trainer import TrainState
from .base import StoreBase


class StoreCheckpoint(StoreBase[TrainState]):
    """Training states in the uncompressed container format."""

    suffix = ".cnrv"

    def encode(self, obj: TrainState) -> bytes:
        return encode_checkpoint(obj)

    def decode(self, data: bytes) -> TrainState:
        return decode_checkpoint(data)


checkpoint = StoreCheckpoint()
