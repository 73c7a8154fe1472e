from .commands import analyze, compress, decode, decompress, encode, interpolate, metrics, sweep, train
from .router import CommandRouter

cli_router = CommandRouter()

cli_router.include_router(train.router)
cli_router.include_router(encode.router)
cli_router.include_router(decode.router)
cli_router.include_router(compress.router)
cli_router.include_router(decompress.router)
cli_router.include_router(metrics.router)
cli_router.include_router(analyze.router)
cli_router.include_router(interpolate.router)
cli_router.include_router(sweep.router)
