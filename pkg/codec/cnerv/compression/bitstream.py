import struct
from typing import Tuple
from cnerv.core.errors import BitstreamError


class Writer:
    """Little-endian byte builder."""

    def __init__(self) -> None:
        self._buffer = bytearray()

    def raw(self, data: bytes) -> None:
        self._buffer += data

    def u8(self, value: int) -> None:
        self._buffer += struct.pack("<B", value)

    def u16(self, value: int) -> None:
        self._buffer += struct.pack("<H", value)

    def u32(self, value: int) -> None:
        self._buffer += struct.pack("<I", value)

    def u64(self, value: int) -> None:
        self._buffer += struct.pack("<Q", value)

    def f64(self, value: float) -> None:
        self._buffer += struct.pack("<d", value)

    def section(self, data: bytes) -> None:
        """u64 length prefix followed by the bytes."""
        self.u64(len(data))
        self.raw(data)

    def getvalue(self) -> bytes:
        return bytes(self._buffer)


class Reader:
    """Sequential little-endian reader; reading past the end raises `BitstreamError`."""

    def __init__(self, data: bytes):
        self._data = memoryview(data)
        self.position = 0

    def raw(self, size: int) -> bytes:
        if self.position + size > len(self._data):
            raise BitstreamError(f"need {size} bytes at offset {self.position}, only {self.remaining} left")
        chunk = bytes(self._data[self.position:self.position + size])
        self.position += size
        return chunk

    def _unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.raw(struct.calcsize(fmt)))

    def u8(self) -> int:
        return self._unpack("<B")[0]

    def u16(self) -> int:
        return self._unpack("<H")[0]

    def u32(self) -> int:
        return self._unpack("<I")[0]

    def u64(self) -> int:
        return self._unpack("<Q")[0]

    def f64(self) -> float:
        return self._unpack("<d")[0]

    def section(self) -> bytes:
        return self.raw(self.u64())

    @property
    def remaining(self) -> int:
        return len(self._data) - self.position

    def expect_end(self) -> None:
        if self.remaining:
            raise BitstreamError(f"{self.remaining} unexpected trailing bytes")
