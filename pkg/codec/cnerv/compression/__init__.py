from .artifact import (
    FLAG_EMBEDDINGS, FLAG_MODEL, MAGIC, VERSION, BppSummary, CompressedArtifact, CompressedTensor, artifact_frames,
    bpp, compress, decode_artifact, decode_frames, decompress, decompress_embeddings, decompress_model,
    encode_artifact, model_digest
)
from .checkpoint import decode_checkpoint, encode_checkpoint
from .huffman import decode as entropy_decode, encode as entropy_encode
from .prune import prune, prune_arrays
from .quantize import QuantizedTensor, code_width, dequantize, dequantize_array, quantize
from .sweep import SweepRow, embedding_bit_sweep, evaluate_compressed, frame_embeddings, model_bit_sweep
