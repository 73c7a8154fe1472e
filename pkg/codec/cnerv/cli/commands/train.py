import argparse
import math
from cnerv import trainer
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, STATUS_USAGE, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.core.errors import CNeRVError
from cnerv.store import checkpoint
from cnerv.tensor import precision

router = CommandRouter()


def _last(values: list) -> float:
    return values[-1][1] if values else math.nan


@router.command(
    "train",
    summary="Fit a model on the seen frames, evaluating the seen and unseen splits",
    arguments=(
        argument("--resume", help="checkpoint to continue training from"),
        argument("--stop-at", type=int, help="stop after this many steps (the checkpoint can be resumed)"),
    ),
)
def train_model(args: argparse.Namespace) -> None:
    """Train and write checkpoint.cnrv, history.csv and train.csv."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    state = None
    if args.resume:
        state = deps.load_checkpoint(args.resume)
        deps.check_kind(args, state.config.kind)
    dataset = deps.get_dataset(config, state.config if state else None)
    if state is not None and state.dataset_digest != dataset.digest:
        raise CommandError(STATUS_USAGE, "The checkpoint was trained on different frames")
    try:
        with precision(config.precision):
            state = trainer.train(
                config.model, dataset, config.split, config.optim, config.loss, state=state, stop_at=args.stop_at
            )
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Training failed: %s" % str(e))
    checkpoint.create(out_dir / "checkpoint.cnrv", state)
    deps.write_report(out_dir, "history.csv", [row._asdict() for row in state.history])
    deps.write_report(out_dir, "train.csv", [{
        "kind": state.config.kind,
        "parameters": state.params.count(),
        "steps": state.step,
        "seen_psnr": _last(state.split_psnr("seen")),
        "unseen_psnr": _last(state.split_psnr("unseen")),
        "best_seen_psnr": state.best_seen_psnr,
        "best_unseen_psnr": state.best_unseen_psnr,
    }])
