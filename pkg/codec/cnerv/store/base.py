import logging
import os
import tempfile
from pathlib import Path
from typing import Generic, Optional, TypeVar, Union
from tenacity import after_log, before_log, retry, retry_if_exception_type, stop_after_attempt, wait_fixed

logger = logging.getLogger(__name__)

ObjType = TypeVar("ObjType")
PathLike = Union[str, Path]

max_tries = 5
wait_seconds = 0.05


@retry(
    retry=retry_if_exception_type(PermissionError),
    stop=stop_after_attempt(max_tries),
    wait=wait_fixed(wait_seconds),
    before=before_log(logger, logging.DEBUG),
    after=after_log(logger, logging.WARN),
    reraise=True,
)
def replace(source: PathLike, target: PathLike) -> None:
    """Rename over an existing file; a reader holding the target open may block it briefly."""
    os.replace(source, target)


class StoreBase(Generic[ObjType]):
    """Basic file operations on one kind of object: get, create, remove, exists.
    Subclasses define the byte encoding.
    """

    suffix = ""

    def encode(self, obj: ObjType) -> bytes:
        raise NotImplementedError

    def decode(self, data: bytes) -> ObjType:
        raise NotImplementedError

    def get(self, path: PathLike) -> Optional[ObjType]:
        """Read and decode the object, None when the file does not exist."""
        try:
            data = Path(path).read_bytes()
        except FileNotFoundError:
            return None
        return self.decode(data)

    def create(self, path: PathLike, obj: ObjType) -> Path:
        """Write the object atomically: readers see the old file or the complete new one."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        data = self.encode(obj)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as f:
                f.write(data)
            replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise
        logger.info("Wrote %s (%d bytes)", path, len(data))
        return path

    def remove(self, path: PathLike) -> Optional[ObjType]:
        """Delete the file and return the object it held."""
        obj = self.get(path)
        if obj is not None:
            Path(path).unlink()
        return obj

    def exists(self, path: PathLike) -> bool:
        return Path(path).is_file()
