"""`.cnrv` container of a pruned, quantized and entropy coded model and/or frame embeddings.

Layout (little-endian, sections are u64 length prefixed):

    b"CNRV" | u16 version | u16 flags | header section (compact sorted JSON)
    [model section]      per parameter in config order: u8 has_bitmap, [bitmap section], quantized block
    [embedding section]  u32 frames, per frame: u32 frame id, quantized block

A quantized block is f64 mu_min | f64 scale | u8 bit | u8 constant | u64 count | Huffman payload section.
"""
import hashlib
import json
import logging
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
from cnerv.core.errors import BitstreamError, DigestMismatchError, ModelKindError
from cnerv.embedding import EmbeddingGrid
from cnerv.models import ModelParams, cnerv_forward, nerv_forward, param_shapes
from cnerv.schemas import CompressionConfig, ModelConfig
from cnerv.tensor import Tensor, default_dtype
from . import huffman
from .bitstream import Reader, Writer
from .prune import Masks, prune
from .quantize import QuantizedTensor, dequantize_array, quantize

logger = logging.getLogger(__name__)

MAGIC = b"CNRV"
VERSION = 1
FLAG_MODEL = 1
FLAG_EMBEDDINGS = 2
FLAG_RAW = 4
FLAG_STATE = 8


@dataclass
class CompressedTensor:
    """Quantized survivors of one parameter tensor; `bitmap` is None for unpruned tensors."""
    quantized: QuantizedTensor
    bitmap: Optional[np.ndarray] = None


@dataclass
class BppSummary:
    model_bytes: int
    embedding_bytes: int
    total_bytes: int
    frames: int
    H: int
    W: int

    @property
    def embedding_bpp(self) -> float:
        return bpp(self.embedding_bytes, self.frames, self.H, self.W)

    @property
    def total_bpp(self) -> float:
        return bpp(self.total_bytes, self.frames, self.H, self.W)


@dataclass
class CompressedArtifact:
    header: Dict[str, Any]
    tensors: "OrderedDict[str, CompressedTensor]" = field(default_factory=OrderedDict)
    embeddings: "OrderedDict[int, QuantizedTensor]" = field(default_factory=OrderedDict)

    @property
    def config(self) -> ModelConfig:
        return ModelConfig.parse_obj(self.header["model"])

    @property
    def has_model(self) -> bool:
        return bool(self.tensors)


def bpp(n_bytes: int, frames: int, H: int, W: int) -> float:
    """Bits per pixel: 8 · bytes / (frames · H · W)."""
    return 8.0 * n_bytes / (frames * H * W)


def model_digest(config: ModelConfig, arrays: Mapping[str, np.ndarray]) -> str:
    """Fingerprint of a model's config and parameter values at single precision."""
    sha = hashlib.sha256(config.json(sort_keys=True).encode("utf-8"))  # type: ignore
    for name in param_shapes(config):
        sha.update(name.encode("utf-8"))
        sha.update(np.ascontiguousarray(arrays[name], dtype="<f4").tobytes())
    return sha.hexdigest()


def _quantize_survivors(values: np.ndarray, bit: int, mask: Optional[np.ndarray]) -> CompressedTensor:
    if mask is None:
        return CompressedTensor(quantize(values, bit))
    survivors = values[mask]
    if survivors.size == 0:
        return CompressedTensor(QuantizedTensor(0.0, 0.0, bit, np.zeros(0, dtype=np.int64), (0,)), mask)
    return CompressedTensor(quantize(survivors, bit), mask)


def dequantize_tensor(tensor: CompressedTensor, shape: Tuple[int, ...]) -> np.ndarray:
    if tensor.bitmap is None:
        return dequantize_array(tensor.quantized).reshape(shape)
    out = np.zeros(shape, dtype=np.float64)
    if tensor.quantized.codes.size:
        out[tensor.bitmap] = dequantize_array(tensor.quantized).reshape(-1)
    return out


def compress(
    params: ModelParams,
    embeddings: Sequence[EmbeddingGrid],
    cfg: CompressionConfig = CompressionConfig(),
    masks: Optional[Masks] = None,
    include_model: bool = True,
    frame_ids: Optional[Sequence[int]] = None,
    frame_times: Optional[Sequence[float]] = None,
    split_digest: str = "",
    dataset_digest: str = ""
) -> CompressedArtifact:
    """Prune, quantize the parameters at `bits_model` and the embeddings at `bits_embed`.

    :param masks: survivor bitmaps of an already pruned (and fine-tuned) model; pruning is skipped
    :param include_model: False produces an embedding-only artifact bound to `params` by digest
    :param frame_ids: frames the artifact decodes to, defaults to the embedding frame ids
    :param frame_times: normalized indices of those frames (index-based models)
    """
    config = params.config
    if masks is None and cfg.prune_ratio > 0.0 and include_model:
        params, masks = prune(params, cfg.prune_ratio, cfg.per_layer)
    tensors: "OrderedDict[str, CompressedTensor]" = OrderedDict()
    if include_model:
        with ThreadPoolExecutor() as pool:
            jobs = [
                pool.submit(
                    _quantize_survivors, p.data.astype(np.float64), cfg.bits_model, (masks or {}).get(name)
                )
                for name, p in params.items()
            ]
            for (name, _), job in zip(params.items(), jobs):
                tensors[name] = job.result()
        shapes = param_shapes(config)
        digest = model_digest(config, {name: dequantize_tensor(t, shapes[name]) for name, t in tensors.items()})
    else:
        digest = model_digest(config, params.arrays())
    quantized = OrderedDict((grid.frame_id, quantize(grid.values, cfg.bits_embed)) for grid in embeddings)
    ids = list(frame_ids) if frame_ids is not None else list(quantized)
    header = {
        "version": VERSION,
        "model": json.loads(config.json()),
        "model_digest": digest,
        "split_digest": split_digest,
        "dataset_digest": dataset_digest,
        "frame_ids": ids,
        "frame_times": list(frame_times) if frame_times is not None else [],
        "bits_model": cfg.bits_model,
        "bits_embed": cfg.bits_embed,
        "prune_ratio": cfg.prune_ratio,
    }
    return CompressedArtifact(header=header, tensors=tensors, embeddings=quantized)


def _write_quantized(out: Writer, q: QuantizedTensor) -> None:
    out.f64(q.mu_min)
    out.f64(q.scale)
    out.u8(q.bit)
    out.u8(int(q.constant))
    out.u64(q.codes.size)
    out.section(huffman.encode(q.codes, q.bit))


def _read_quantized(reader: Reader, shape: Optional[Tuple[int, ...]]) -> QuantizedTensor:
    mu_min, scale, bit, constant, count = reader.f64(), reader.f64(), reader.u8(), reader.u8(), reader.u64()
    codes = huffman.decode(reader.section())
    if codes.size != count or bool(constant) != (scale == 0.0):
        raise BitstreamError("quantized block is inconsistent with its payload")
    shape = shape if shape is not None else (count,)
    if int(np.prod(shape)) != count:
        raise BitstreamError(f"quantized block holds {count} values, expected shape {shape}")
    return QuantizedTensor(mu_min=mu_min, scale=scale, bit=bit, codes=codes.reshape(shape), shape=shape)


def _encode_model(artifact: CompressedArtifact) -> bytes:
    out = Writer()
    for name in param_shapes(artifact.config):
        tensor = artifact.tensors[name]
        out.u8(int(tensor.bitmap is not None))
        if tensor.bitmap is not None:
            out.section(np.packbits(tensor.bitmap.reshape(-1)).tobytes())
        _write_quantized(out, tensor.quantized)
    return out.getvalue()


def _encode_embeddings(artifact: CompressedArtifact) -> bytes:
    out = Writer()
    out.u32(len(artifact.embeddings))
    for frame_id, q in artifact.embeddings.items():
        out.u32(frame_id)
        _write_quantized(out, q)
    return out.getvalue()


def encode_artifact(artifact: CompressedArtifact) -> Tuple[bytes, BppSummary]:
    """Serialize an artifact and account its size per section."""
    flags = (FLAG_MODEL if artifact.has_model else 0) | (FLAG_EMBEDDINGS if artifact.embeddings else 0)
    out = Writer()
    out.raw(MAGIC)
    out.u16(VERSION)
    out.u16(flags)
    out.section(json.dumps(artifact.header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
    model = _encode_model(artifact) if artifact.has_model else b""
    embeddings = _encode_embeddings(artifact) if artifact.embeddings else b""
    if model:
        out.section(model)
    if embeddings:
        out.section(embeddings)
    data = out.getvalue()
    config = artifact.config
    summary = BppSummary(
        model_bytes=len(model),
        embedding_bytes=len(embeddings),
        total_bytes=len(data),
        frames=max(1, len(artifact.header["frame_ids"])),
        H=config.H,
        W=config.W,
    )
    logger.debug(
        "Artifact: %d bytes (model %d, embeddings %d), %.4f bpp total, %.4f bpp embeddings",
        summary.total_bytes, summary.model_bytes, summary.embedding_bytes, summary.total_bpp, summary.embedding_bpp
    )
    return data, summary


def read_preamble(reader: Reader) -> Tuple[int, Dict[str, Any]]:
    if reader.raw(4) != MAGIC:
        raise BitstreamError("not a .cnrv container (bad magic)")
    version, flags = reader.u16(), reader.u16()
    if version != VERSION:
        raise BitstreamError(f"unsupported container version {version}")
    try:
        header = json.loads(reader.section().decode("utf-8"))
    except (UnicodeDecodeError, ValueError) as e:
        raise BitstreamError(f"container header is not valid JSON: {e}")
    return flags, header


def decode_artifact(data: bytes) -> CompressedArtifact:
    reader = Reader(data)
    flags, header = read_preamble(reader)
    if flags & (FLAG_RAW | FLAG_STATE):
        raise BitstreamError("container is a training checkpoint, not a compressed artifact")
    artifact = CompressedArtifact(header=header)
    config = artifact.config
    if flags & FLAG_MODEL:
        model = Reader(reader.section())
        for name, shape in param_shapes(config).items():
            bitmap = None
            if model.u8():
                bits = np.frombuffer(model.section(), dtype=np.uint8)
                bitmap = np.unpackbits(bits, count=int(np.prod(shape))).astype(bool).reshape(shape)
            q = _read_quantized(model, shape if bitmap is None else None)
            if bitmap is not None and q.codes.size and q.codes.size != int(bitmap.sum()):
                raise BitstreamError(f"{name}: {q.codes.size} values for {int(bitmap.sum())} survivors")
            artifact.tensors[name] = CompressedTensor(q, bitmap)
        model.expect_end()
    if flags & FLAG_EMBEDDINGS:
        section = Reader(reader.section())
        for _ in range(section.u32()):
            frame_id = section.u32()
            artifact.embeddings[frame_id] = _read_quantized(section, (config.L, config.M, config.N))
        section.expect_end()
    reader.expect_end()
    return artifact


def decompress_model(artifact: CompressedArtifact, dtype: Optional[np.dtype] = None) -> ModelParams:
    """Dequantized parameters; pruned weights are exact zeros."""
    if not artifact.has_model:
        raise BitstreamError("artifact carries no model")
    config = artifact.config
    shapes = param_shapes(config)
    arrays = OrderedDict(
        (name, dequantize_tensor(artifact.tensors[name], shape)) for name, shape in shapes.items()
    )
    return ModelParams.from_arrays(config, arrays, dtype=np.dtype(dtype or default_dtype()))


def decompress_embeddings(
    artifact: CompressedArtifact,
    params: ModelParams,
    dtype: Optional[np.dtype] = None
) -> "OrderedDict[int, EmbeddingGrid]":
    """Dequantized embeddings, refused unless they were produced for `params`."""
    digest = model_digest(params.config, params.arrays())
    if artifact.header["model_digest"] != digest:
        raise DigestMismatchError(
            f"embeddings belong to model {artifact.header['model_digest'][:12]}, got model {digest[:12]}"
        )
    dtype = np.dtype(dtype or params["decoder.head.weight"].dtype)
    return OrderedDict(
        (frame_id, EmbeddingGrid(values=Tensor(dequantize_array(q), dtype=dtype), frame_id=frame_id))
        for frame_id, q in artifact.embeddings.items()
    )


def decompress(
    artifact: CompressedArtifact,
    dtype: Optional[np.dtype] = None
) -> Tuple[ModelParams, "OrderedDict[int, EmbeddingGrid]"]:
    params = decompress_model(artifact, dtype)
    return params, decompress_embeddings(artifact, params)


def decode_frames(
    params: ModelParams,
    embeddings: Union[Mapping[int, EmbeddingGrid], None],
    frame_ids: Sequence[int],
    frame_times: Sequence[float] = ()
) -> "OrderedDict[int, np.ndarray]":
    """Images in [0, 1] of the requested frames.
    CNeRV decodes stored embeddings; NeRV decodes the recorded frame indices.
    """
    images: "OrderedDict[int, np.ndarray]" = OrderedDict()
    if params.config.kind == "cnerv":
        if embeddings is None:
            raise ModelKindError("CNeRV frames need embeddings to decode")
        for frame_id in frame_ids:
            images[frame_id] = np.clip(cnerv_forward(embeddings[frame_id], params).data, 0.0, 1.0)
    else:
        if len(frame_times) != len(frame_ids):
            raise BitstreamError("NeRV artifact does not record a frame index for every frame")
        for frame_id, t in zip(frame_ids, frame_times):
            images[frame_id] = np.clip(nerv_forward(t, params).data, 0.0, 1.0)
    return images


def artifact_frames(
    artifact: CompressedArtifact,
    model: Optional[ModelParams] = None
) -> "OrderedDict[int, np.ndarray]":
    """Decode every frame an artifact describes, using its own model unless `model` is given."""
    params = model if model is not None else decompress_model(artifact)
    embeddings: Optional[Mapping[int, EmbeddingGrid]] = None
    if artifact.embeddings:
        embeddings = decompress_embeddings(artifact, params)
    return decode_frames(params, embeddings, artifact.header["frame_ids"], artifact.header.get("frame_times", []))
