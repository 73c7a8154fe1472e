import argparse
import itertools
import json
import logging
import math
from dataclasses import asdict
from typing import Any, Dict, List
from pydantic import ValidationError
from cnerv import trainer
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, STATUS_USAGE, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.compression import embedding_bit_sweep
from cnerv.core.errors import CNeRVError
from cnerv.schemas import ModelConfig, RunConfig
from cnerv.tensor import precision

logger = logging.getLogger(__name__)

router = CommandRouter()


def grid_models(config: RunConfig) -> List[ModelConfig]:
    """One CNeRV config per cell of the {b, P/Q, M x N, L} grid; empty axes keep the configured value."""
    model, sweep = config.model, config.sweep
    if model.kind != "cnerv":
        return [model]
    cells = itertools.product(
        sweep.b or [model.cae.b],
        sweep.PQ or [model.cae.P],
        sweep.blocks or [(model.M, model.N)],
        sweep.L or [model.L],
    )
    models = []
    for b, pq, (m, n), length in cells:
        document: Dict[str, Any] = json.loads(model.json())
        document["cae"].update({"b": b, "P": pq, "Q": pq, "M": m, "N": n})
        document.update({
            "L": length,
            "block_h": model.H // (m * model.upscale_product),
            "block_w": model.W // (n * model.upscale_product),
        })
        try:
            models.append(ModelConfig.parse_obj(document))
        except ValidationError as e:
            raise CommandError(STATUS_USAGE, f"Sweep cell b={b} P=Q={pq} M={m} N={n} L={length} is invalid: {e}")
    return models


@router.command(
    "sweep",
    summary="Train one model per grid cell and report decoded quality at every embedding width",
    arguments=(argument("--checkpoint", help="sweep only the embedding widths of this trained checkpoint"),),
)
def sweep_grid(args: argparse.Namespace) -> None:
    """Write sweep.csv with one row per (grid cell, embedding width)."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    rows = []
    try:
        if args.checkpoint:
            state = deps.load_checkpoint(args.checkpoint)
            deps.check_kind(args, state.config.kind)
            states = [state]
        else:
            states = []
            dataset = deps.get_dataset(config)
            for model in grid_models(config):
                with precision(config.precision):
                    states.append(trainer.train(model, dataset, config.split, config.optim, config.loss))
        for state in states:
            dataset = deps.get_dataset(config, state.config)
            seen = state.split_psnr("seen")
            for row in embedding_bit_sweep(state, dataset, config.sweep.bits_embed, base=config.compression):
                cae = state.config.cae
                rows.append({
                    "kind": state.config.kind,
                    "b": cae.b,
                    "P": cae.P,
                    "Q": cae.Q,
                    "M": cae.M,
                    "N": cae.N,
                    "L": state.config.L,
                    "parameters": state.params.count(),
                    "seen_psnr": seen[-1][1] if seen else math.nan,
                    **asdict(row),
                })
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Sweep failed: %s" % str(e))
    deps.write_report(out_dir, "sweep.csv", rows)
