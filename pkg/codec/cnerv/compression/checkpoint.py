"""Uncompressed `.cnrv` variant holding a full training state.

After the common preamble (flags FLAG_MODEL | FLAG_RAW | FLAG_STATE) come four
sections: parameters, first moments, second moments (each a raw array per
parameter in config order) and survivor bitmaps (empty when unpruned).
Scalars, configs, rng state and metric history live in the JSON header.
"""
import json
from collections import OrderedDict
from typing import Dict, Mapping
import numpy as np
from cnerv.core.errors import BitstreamError
from cnerv.models import ModelParams, param_shapes
from cnerv.schemas import LossConfig, ModelConfig, OptimConfig, SplitSpec
from cnerv.trainer import HistoryRow, TrainState
from .artifact import FLAG_MODEL, FLAG_RAW, FLAG_STATE, MAGIC, VERSION, read_preamble
from .bitstream import Reader, Writer

DTYPES = {0: np.dtype(np.float32), 1: np.dtype(np.float64)}
DTYPE_CODES = {4: 0, 8: 1}


def _write_arrays(config: ModelConfig, arrays: Mapping[str, np.ndarray]) -> bytes:
    out = Writer()
    for name in param_shapes(config):
        array = np.asarray(arrays[name])
        if array.dtype.kind != "f" or array.dtype.itemsize not in DTYPE_CODES:
            raise BitstreamError(f"{name}: cannot store dtype {array.dtype}")
        out.u8(DTYPE_CODES[array.dtype.itemsize])
        out.section(np.ascontiguousarray(array, dtype=array.dtype.newbyteorder("<")).tobytes())
    return out.getvalue()


def _read_arrays(config: ModelConfig, data: bytes) -> "OrderedDict[str, np.ndarray]":
    reader = Reader(data)
    arrays: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, shape in param_shapes(config).items():
        code = reader.u8()
        if code not in DTYPES:
            raise BitstreamError(f"{name}: unknown dtype code {code}")
        raw = reader.section()
        if len(raw) != int(np.prod(shape)) * DTYPES[code].itemsize:
            raise BitstreamError(f"{name}: {len(raw)} bytes do not hold shape {shape}")
        arrays[name] = np.frombuffer(raw, dtype=DTYPES[code].newbyteorder("<")).reshape(shape).astype(DTYPES[code])
    reader.expect_end()
    return arrays


def _write_masks(config: ModelConfig, masks: Mapping[str, np.ndarray]) -> bytes:
    out = Writer()
    out.u32(len(masks))
    for index, name in enumerate(param_shapes(config)):
        if name in masks:
            out.u32(index)
            out.section(np.packbits(np.asarray(masks[name], dtype=bool).reshape(-1)).tobytes())
    return out.getvalue()


def _read_masks(config: ModelConfig, data: bytes) -> Dict[str, np.ndarray]:
    reader = Reader(data)
    shapes = list(param_shapes(config).items())
    masks = OrderedDict()
    for _ in range(reader.u32()):
        index = reader.u32()
        if index >= len(shapes):
            raise BitstreamError(f"bitmap refers to parameter {index} of {len(shapes)}")
        name, shape = shapes[index]
        bits = np.frombuffer(reader.section(), dtype=np.uint8)
        masks[name] = np.unpackbits(bits, count=int(np.prod(shape))).astype(bool).reshape(shape)
    reader.expect_end()
    return masks


def encode_checkpoint(state: TrainState) -> bytes:
    config = state.config
    header = {
        "version": VERSION,
        "model": json.loads(config.json()),
        "optim": json.loads(state.optim.json()),
        "loss": json.loads(state.loss_cfg.json()),
        "split": json.loads(state.split_spec.json()),
        "split_digest": state.split_spec.digest(),
        "dataset_digest": state.dataset_digest,
        "total_steps": state.total_steps,
        "step": state.step,
        "epoch": state.epoch,
        "adam_t": state.adam_t,
        "rng_state": state.rng_state,
        "best_seen_psnr": state.best_seen_psnr,
        "best_unseen_psnr": state.best_unseen_psnr,
        "history": [list(row) for row in state.history],
        "step_losses": state.step_losses,
        "pruned": state.masks is not None,
    }
    out = Writer()
    out.raw(MAGIC)
    out.u16(VERSION)
    out.u16(FLAG_MODEL | FLAG_RAW | FLAG_STATE)
    out.section(json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"))
    out.section(_write_arrays(config, state.params.arrays()))
    out.section(_write_arrays(config, state.m))
    out.section(_write_arrays(config, state.v))
    out.section(_write_masks(config, state.masks or {}))
    return out.getvalue()


def decode_checkpoint(data: bytes) -> TrainState:
    reader = Reader(data)
    flags, header = read_preamble(reader)
    if flags != FLAG_MODEL | FLAG_RAW | FLAG_STATE:
        raise BitstreamError("container is not a training checkpoint")
    config = ModelConfig.parse_obj(header["model"])
    params = ModelParams.from_arrays(config, _read_arrays(config, reader.section()))
    m = _read_arrays(config, reader.section())
    v = _read_arrays(config, reader.section())
    masks = _read_masks(config, reader.section())
    reader.expect_end()
    return TrainState(
        params=params,
        optim=OptimConfig.parse_obj(header["optim"]),
        loss_cfg=LossConfig.parse_obj(header["loss"]),
        split_spec=SplitSpec.parse_obj(header["split"]),
        total_steps=header["total_steps"],
        rng_state=header["rng_state"],
        step=header["step"],
        epoch=header["epoch"],
        adam_t=header["adam_t"],
        m=dict(m),
        v=dict(v),
        best_seen_psnr=header["best_seen_psnr"],
        best_unseen_psnr=header["best_unseen_psnr"],
        history=[HistoryRow(*row) for row in header["history"]],
        step_losses=header["step_losses"],
        masks=masks if header["pruned"] else None,
        dataset_digest=header["dataset_digest"],
    )
