import argparse
from cnerv import trainer
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.core.errors import CNeRVError
from cnerv.data import write_frames

router = CommandRouter()


@router.command(
    "interpolate",
    summary="Decode unseen frames from the mean embedding of their seen neighbors",
    arguments=(
        argument("--checkpoint", required=True, help="trained CNeRV checkpoint"),
        argument("--write-frames", action="store_true", help="also write the interpolated frames"),
    ),
)
def interpolate_frames(args: argparse.Namespace) -> None:
    """Write interpolate.csv with pixel, true-embedding and interpolated-embedding PSNR per eligible frame."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    state = deps.load_checkpoint(args.checkpoint)
    deps.check_kind(args, state.config.kind)
    dataset = deps.get_dataset(config, state.config)
    try:
        results = trainer.interpolate_all(state, dataset)
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to interpolate: %s" % str(e))
    if args.write_frames:
        write_frames([r.image for r in results], out_dir / "interpolated", ids=[r.frame_id for r in results])
    deps.write_report(out_dir, "interpolate.csv", [
        {"frame_id": r.frame_id, "psnr_pixel": r.psnr_pixel, "psnr_true": r.psnr_true, "psnr_interp": r.psnr}
        for r in results
    ])
