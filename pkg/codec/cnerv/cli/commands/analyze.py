import argparse
from typing import Dict, Tuple
from cnerv.analysis import (
    EmbeddingMatrix, cka_grid, embedding_matrix, grid_rows, neighbor_distance, normalized_distance, table_rows,
    uniformity
)
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, STATUS_USAGE, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.core.errors import CNeRVError
from cnerv.store import embedding_table

router = CommandRouter()


def _named(value: str) -> Tuple[str, str]:
    name, sep, path = value.partition("=")
    if not sep or not name or not path:
        raise CommandError(STATUS_USAGE, f"expected NAME=PATH, got '{value}'")
    return name, path


@router.command(
    "analyze",
    summary="Uniformity, neighbor distance and pairwise CKA of the input embeddings of trained models",
    arguments=(
        argument(
            "--checkpoint", action="append", required=True, metavar="NAME=PATH",
            help="named trained checkpoint, repeatable",
        ),
    ),
)
def analyze_embeddings(args: argparse.Namespace) -> None:
    """Write analyze.csv, cka.csv and embeddings_<name>.cnem/.csv per model."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    matrices: Dict[str, EmbeddingMatrix] = {}
    rows = []
    try:
        for name, path in (_named(value) for value in args.checkpoint):
            state = deps.load_checkpoint(path)
            matrix = embedding_matrix(state, deps.get_dataset(config, state.config))
            matrices[name] = matrix
            embedding_table.create(out_dir / f"embeddings_{name}.cnem", matrix)
            deps.write_report(out_dir, f"embeddings_{name}.csv", table_rows(matrix))
            rows.append({
                "method": name,
                "uniformity": uniformity(matrix, config.uniformity),
                "uniformity_seen": uniformity(matrix, config.uniformity, split="seen"),
                "uniformity_unseen": uniformity(matrix, config.uniformity, split="unseen"),
                "neighbor_distance": neighbor_distance(matrix),
                "normalized_distance": normalized_distance(matrix),
            })
        names, grid = cka_grid(matrices)
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to analyze the embeddings: %s" % str(e))
    deps.write_report(out_dir, "analyze.csv", rows)
    deps.write_report(out_dir, "cka.csv", grid_rows(names, grid))
