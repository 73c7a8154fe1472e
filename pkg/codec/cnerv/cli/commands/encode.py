import argparse
from cnerv import trainer
from cnerv.cli import deps
from cnerv.cli.deps import STATUS_FAILED, CommandError
from cnerv.cli.router import CommandRouter, argument
from cnerv.compression import compress
from cnerv.core.errors import CNeRVError
from cnerv.store import artifact

router = CommandRouter()


@router.command(
    "encode",
    summary="Encode frames with a trained CNeRV encoder in one forward pass each",
    arguments=(
        argument("--checkpoint", required=True, help="trained CNeRV checkpoint"),
        argument("--all-frames", action="store_true", help="encode every frame, not only the unseen split"),
        argument("--nerv-checkpoint", help="trained NeRV checkpoint fine-tuned on the same frames"),
        argument("--finetune-steps", type=int, default=300, help="step budget of the NeRV fine-tuning"),
        argument("--bicubic-factor", type=int, default=4, help="downsampling factor of the bicubic baseline"),
    ),
)
def encode_frames(args: argparse.Namespace) -> None:
    """Write embeddings.cnrv (embedding-only artifact) and encode.csv."""
    config = deps.get_config(args)
    out_dir = deps.get_out_dir(args)
    deps.log_config(config, out_dir)
    state = deps.load_checkpoint(args.checkpoint)
    deps.check_kind(args, state.config.kind)
    dataset = deps.get_dataset(config, state.config)
    frame_ids = list(range(len(dataset))) if args.all_frames else None
    try:
        encoded = trainer.encode_unseen(state, dataset, frame_ids)
        rows = []
        for item in encoded:
            rows.append({
                "frame_id": item.frame_id,
                "psnr": item.psnr,
                "ms_ssim": item.ms_ssim,
                "seconds": item.seconds,
                "bicubic_psnr": trainer.bicubic_baseline_psnr(dataset[item.frame_id], args.bicubic_factor),
            })
        if args.nerv_checkpoint:
            nerv_state = deps.load_checkpoint(args.nerv_checkpoint)
            for row, item in zip(rows, encoded):
                result = trainer.finetune_unseen(
                    nerv_state, dataset, item.frame_id, target_psnr=item.psnr, max_steps=args.finetune_steps
                )
                row.update({
                    "nerv_steps": result.steps,
                    "nerv_seconds": result.seconds,
                    "nerv_psnr": result.psnr,
                    "nerv_reached": result.reached,
                })
        embeddings = compress(
            state.params,
            [item.embedding for item in encoded],
            config.compression,
            include_model=False,
            split_digest=state.split_spec.digest(),
            dataset_digest=dataset.digest,
        )
    except CNeRVError as e:
        raise CommandError(STATUS_FAILED, "Unable to encode the frames: %s" % str(e))
    artifact.create(out_dir / "embeddings.cnrv", embeddings)
    deps.write_report(out_dir, "encode.csv", rows)
