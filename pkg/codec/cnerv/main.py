import logging
import sys
from typing import List, Optional
from cnerv.cli.api import cli_router
from cnerv.cli.deps import STATUS_FAILED, STATUS_OK, STATUS_UNEXPECTED, CommandError
from cnerv.core.config import settings
from cnerv.core.errors import CNeRVError

logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit status."""
    parser = cli_router.build_parser(settings.PROJECT_NAME)
    args = parser.parse_args(argv)
    logger.info("%s %s: %s", settings.PROJECT_NAME, settings.VERSION, args.command)
    try:
        args.handler(args)
    except CommandError as e:
        logger.error(e.detail)
        return e.status
    except CNeRVError as e:
        logger.error("%s", e)
        return STATUS_FAILED
    except Exception as e:
        logger.exception("Unexpected failure: %s", e)
        return STATUS_UNEXPECTED
    logger.info("%s finished", args.command)
    return STATUS_OK


if __name__ == "__main__":
    sys.exit(main())
