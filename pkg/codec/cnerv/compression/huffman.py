"""Canonical Huffman coding of non-negative integer code streams.

Payload layout (little-endian):

    u8   symbol width in bytes
    u32  number of distinct symbols
    ...  per symbol, ascending: symbol (width bytes), u8 code length
    u64  number of coded values
    u32  number of data bytes
    ...  data, codewords packed MSB first, zero padded
    u32  CRC32 of everything above
"""
import heapq
import math
import zlib
from typing import Dict, List, Tuple
import numpy as np
from cnerv.core.errors import BitstreamError, CodecChecksumError
from .bitstream import Reader, Writer
from .quantize import code_width

MAX_CODE_LENGTH = 63
TABLE_BITS = 12


def symbol_width(bit: int) -> int:
    """Bytes per symbol in the code-length table."""
    return max(1, int(math.ceil(code_width(bit) / 8)))


def code_lengths(symbols: np.ndarray, counts: np.ndarray) -> Dict[int, int]:
    """Huffman code length of every symbol; a lone symbol gets length 1."""
    if len(symbols) == 1:
        return {int(symbols[0]): 1}
    # (weight, tiebreak, members)
    heap: List[Tuple[int, int, List[int]]] = [
        (int(count), i, [int(symbol)]) for i, (symbol, count) in enumerate(zip(symbols, counts))
    ]
    heapq.heapify(heap)
    lengths = {int(symbol): 0 for symbol in symbols}
    tiebreak = len(heap)
    while len(heap) > 1:
        w1, _, a = heapq.heappop(heap)
        w2, _, b = heapq.heappop(heap)
        for symbol in a + b:
            lengths[symbol] += 1
        heapq.heappush(heap, (w1 + w2, tiebreak, a + b))
        tiebreak += 1
    return lengths


def canonical_codes(lengths: Dict[int, int]) -> Dict[int, int]:
    """Codewords assigned in (length, symbol) order."""
    codes = {}
    code, previous = 0, 0
    for symbol, length in sorted(lengths.items(), key=lambda item: (item[1], item[0])):
        code <<= length - previous
        codes[symbol] = code
        code += 1
        previous = length
    return codes


def _pack(values: np.ndarray, lengths: Dict[int, int], codes: Dict[int, int]) -> bytes:
    if values.size == 0:
        return b""
    symbols = np.array(sorted(lengths), dtype=np.int64)
    index = np.searchsorted(symbols, values)
    length = np.array([lengths[int(s)] for s in symbols], dtype=np.int64)[index]
    word = np.array([codes[int(s)] for s in symbols], dtype=np.uint64)[index]
    longest = int(length.max())
    # bit j of every codeword, MSB first; positions past the codeword length are dropped
    positions = np.arange(longest, dtype=np.int64)
    shifts = length[:, None] - 1 - positions[None, :]
    valid = shifts >= 0
    bits = (word[:, None] >> np.where(valid, shifts, 0).astype(np.uint64)) & np.uint64(1)
    return np.packbits(bits[valid].astype(np.uint8)).tobytes()


def encode(values: np.ndarray, bit: int) -> bytes:
    """Entropy code integer codes in [0, 2^bit]."""
    values = np.asarray(values, dtype=np.int64).reshape(-1)
    if values.size and (values.min() < 0 or values.max() > 2 ** bit):
        raise BitstreamError(f"codes fall outside [0, 2^{bit}]")
    symbols, counts = np.unique(values, return_counts=True)
    lengths = code_lengths(symbols, counts) if values.size else {}
    if lengths and max(lengths.values()) > MAX_CODE_LENGTH:
        raise BitstreamError(f"Huffman code length exceeds {MAX_CODE_LENGTH} bits")
    codes = canonical_codes(lengths)
    width = symbol_width(bit)
    out = Writer()
    out.u8(width)
    out.u32(len(lengths))
    for symbol in sorted(lengths):
        out.raw(int(symbol).to_bytes(width, "little"))
        out.u8(lengths[symbol])
    out.u64(values.size)
    data = _pack(values, lengths, codes)
    out.u32(len(data))
    out.raw(data)
    body = out.getvalue()
    return body + zlib.crc32(body).to_bytes(4, "little")


def _lookup_table(
    lengths: Dict[int, int], codes: Dict[int, int], table_bits: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Symbol and code length for every `table_bits`-bit prefix; length 0 where no codeword that short fits."""
    symbols = np.zeros(1 << table_bits, dtype=np.int64)
    steps = np.zeros(1 << table_bits, dtype=np.uint8)
    for symbol, code in codes.items():
        length = lengths[symbol]
        if length > table_bits:
            continue
        first, last = code << (table_bits - length), (code + 1) << (table_bits - length)
        symbols[first:last] = symbol
        steps[first:last] = length
    return symbols, steps


def _windows(bits: np.ndarray, table_bits: int) -> np.ndarray:
    """The `table_bits` bits starting at every position as an integer, zero padded past the end."""
    n = bits.size
    padded = np.concatenate([bits, np.zeros(table_bits, dtype=np.uint8)]).astype(np.uint16)
    out = np.zeros(n, dtype=np.uint16)
    for j in range(table_bits):
        out = (out << 1) | padded[j:j + n]
    return out


def _decode_long(
    bits: np.ndarray, position: int, decoder: Dict[Tuple[int, int], int], longest: int
) -> Tuple[int, int]:
    code = 0
    for length in range(1, longest + 1):
        if position + length > bits.size:
            raise BitstreamError("Huffman data ended before all values were decoded")
        code = (code << 1) | int(bits[position + length - 1])
        symbol = decoder.get((length, code))
        if symbol is not None:
            return symbol, length
    raise BitstreamError("Huffman data holds an invalid codeword")


def decode(payload: bytes) -> np.ndarray:
    """Inverse of `encode`; a failed CRC32 check raises `CodecChecksumError`.

    Codewords up to TABLE_BITS long are resolved with one table lookup per value;
    longer ones are walked bit by bit.
    """
    if len(payload) < 4:
        raise BitstreamError("Huffman payload is truncated")
    body, crc = payload[:-4], int.from_bytes(payload[-4:], "little")
    if zlib.crc32(body) != crc:
        raise CodecChecksumError("Huffman payload failed its CRC32 check")
    reader = Reader(body)
    width = reader.u8()
    lengths = {}
    for _ in range(reader.u32()):
        symbol = int.from_bytes(reader.raw(width), "little")
        lengths[symbol] = reader.u8()
    count = reader.u64()
    data = reader.raw(reader.u32())
    reader.expect_end()
    if count == 0:
        return np.zeros(0, dtype=np.int64)
    if not lengths:
        raise BitstreamError("Huffman payload has values but no code table")
    codes = canonical_codes(lengths)
    longest = max(lengths.values())
    table_bits = min(longest, TABLE_BITS)
    table_symbols, table_steps = _lookup_table(lengths, codes, table_bits)
    decoder = {(lengths[symbol], code): symbol for symbol, code in codes.items()}
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    windows = _windows(bits, table_bits)
    steps = table_steps[windows].tobytes()
    starts: List[int] = []
    long_symbols: Dict[int, int] = {}
    position, total = 0, bits.size
    for n in range(count):
        if position >= total:
            raise BitstreamError("Huffman data ended before all values were decoded")
        step = steps[position]
        if step == 0:
            long_symbols[n], step = _decode_long(bits, position, decoder, longest)
        starts.append(position)
        position += step
    # a short codeword may have matched the zero padding
    if position > total:
        raise BitstreamError("Huffman data ended before all values were decoded")
    out = table_symbols[windows[np.asarray(starts, dtype=np.int64)]]
    for n, symbol in long_symbols.items():
        out[n] = symbol
    return out
