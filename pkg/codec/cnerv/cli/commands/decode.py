import argparse
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.compression import artifact_frames
from cnerv.core.errors import CNeRVError
from cnerv.data import write_frames

router = CommandRouter()


@router.command(
    "decode",
    summary="Decode the frames of a .cnrv artifact into PNG files",
    arguments=(
        argument("--artifact", required=True, help="compressed artifact"),
        argument(
            "--model-file", dest="model_path", help="model for embedding-only artifacts (checkpoint or artifact)"
        ),
    ),
)
def decode_frames(args: argparse.Namespace) -> None:
    """Write frames/frame_XXXXX.png and decode.csv."""
    out_dir = deps.get_out_dir(args)
    compressed = deps.load_artifact(args.artifact)
    params = deps.load_params(args.model_path) if args.model_path else None
    if params is None and not compressed.has_model:
        raise CommandError(STATUS_FAILED, "The artifact carries embeddings only, pass --model-file")
    try:
        frames = artifact_frames(compressed, model=params)
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to decode the artifact: %s" % str(e))
    paths = write_frames(list(frames.values()), out_dir / "frames", ids=list(frames))
    deps.write_report(
        out_dir, "decode.csv", [{"frame_id": i, "path": str(path)} for i, path in zip(frames, paths)]
    )
