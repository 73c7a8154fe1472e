import argparse
import numpy as np
from cnerv.analysis import EmbeddingMatrix, table_rows
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.compression import decompress_embeddings, decompress_model
from cnerv.core.errors import CNeRVError
from cnerv.store import embedding_table

router = CommandRouter()


@router.command(
    "decompress",
    summary="Recover dequantized parameters and embeddings from a .cnrv artifact",
    arguments=(
        argument("--artifact", required=True, help="compressed artifact"),
        argument(
            "--model-file", dest="model_path", help="model for embedding-only artifacts (checkpoint or artifact)"
        ),
    ),
)
def decompress_artifact(args: argparse.Namespace) -> None:
    """Write parameters.csv and, when the artifact holds embeddings, embeddings.cnem and embeddings.csv."""
    out_dir = deps.get_out_dir(args)
    compressed = deps.load_artifact(args.artifact)
    try:
        if args.model_path:
            params = deps.load_params(args.model_path)
        elif compressed.has_model:
            params = decompress_model(compressed)
        else:
            raise CommandError(STATUS_FAILED, "The artifact carries embeddings only, pass --model-file")
        embeddings = decompress_embeddings(compressed, params) if compressed.embeddings else {}
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to decompress the artifact: %s" % str(e))
    deps.write_report(out_dir, "parameters.csv", [
        {
            "name": name,
            "shape": "x".join(str(extent) for extent in tensor.shape),
            "count": tensor.size,
            "zeros": int(np.count_nonzero(tensor.data == 0)),
            "min": float(tensor.data.min()),
            "max": float(tensor.data.max()),
        }
        for name, tensor in params.items()
    ])
    if embeddings:
        matrix = EmbeddingMatrix.from_rows(
            [grid.values.data for grid in embeddings.values()], list(embeddings), ["all"] * len(embeddings)
        )
        embedding_table.create(out_dir / "embeddings.cnem", matrix)
        deps.write_report(out_dir, "embeddings.csv", table_rows(matrix))
