import argparse
import logging
import numpy as np
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.core.errors import CNeRVError
from cnerv.data import load_frames
from cnerv.objective import evaluate

logger = logging.getLogger(__name__)

router = CommandRouter()


@router.command(
    "metrics",
    summary="PSNR and MS-SSIM between two frame directories",
    arguments=(
        argument("--pred", required=True, help="directory of predicted frames"),
        argument("--ref", required=True, help="directory of reference frames"),
    ),
)
def frame_metrics(args: argparse.Namespace) -> None:
    """Write metrics.csv with one row per frame; identical frames get PSNR "inf"."""
    out_dir = deps.get_out_dir(args)
    try:
        pred, ref = load_frames(args.pred), load_frames(args.ref)
        if len(pred) != len(ref):
            raise CommandError(STATUS_FAILED, f"{len(pred)} predicted frames but {len(ref)} reference frames")
        rows = []
        for i in range(len(ref)):
            metrics = evaluate(pred[i], ref[i])
            rows.append({"frame_id": i, "psnr": metrics.psnr, "ms_ssim": metrics.ms_ssim})
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to compare the frames: %s" % str(e))
    logger.info("Mean PSNR %.2f dB over %d frames", float(np.mean([row["psnr"] for row in rows])), len(rows))
    deps.write_report(out_dir, "metrics.csv", rows)
