import hashlib
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union
import numpy as np
from PIL import Image, UnidentifiedImageError
from cnerv.core.errors import FrameIOError, ShapeError

logger = logging.getLogger(__name__)

FRAME_SUFFIXES = (".png", ".ppm")


@dataclass
class FrameRecord:
    """One decoded frame: (C, H, W) values in [0, 1]."""
    id: int
    data: np.ndarray
    path: Optional[str] = None


@dataclass
class FrameDataset:
    """Ordered frames with dense ids 0..n-1 sharing one (C, H, W) shape."""
    frames: List[FrameRecord]
    manifest: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        shapes = {frame.data.shape for frame in self.frames}
        if len(shapes) > 1:
            raise ShapeError(f"frames have mixed shapes {sorted(shapes)}")
        if [frame.id for frame in self.frames] != list(range(len(self.frames))):
            raise ShapeError("frame ids must be dense 0..n-1 in order")
        self.manifest.setdefault("digest", dataset_digest(self.frames))

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, index: int) -> np.ndarray:
        return self.frames[index].data

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.frames[0].data.shape  # type: ignore

    @property
    def digest(self) -> str:
        return self.manifest["digest"]


def dataset_digest(frames: Sequence[FrameRecord]) -> str:
    """SHA-256 over frame shapes and 8-bit pixel values."""
    sha = hashlib.sha256()
    for frame in frames:
        sha.update(repr(frame.data.shape).encode("ascii"))
        sha.update(to_uint8(frame.data).tobytes())
    return sha.hexdigest()


def to_uint8(image: np.ndarray) -> np.ndarray:
    return np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)


def _natural_key(path: Path) -> Tuple[Tuple[int, ...], str]:
    return tuple(int(part) for part in re.findall(r"\d+", path.stem)), path.name


def _decode(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            img.load()
            if img.mode not in ("L", "RGB"):
                img = img.convert("RGB")
            pixels = np.asarray(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as e:
        raise FrameIOError(f"cannot decode frame: {e}", path=str(path))
    if pixels.ndim == 2:
        pixels = pixels[:, :, None]
    return np.ascontiguousarray(pixels.transpose(2, 0, 1)).astype(np.float64) / 255.0


def load_frames(directory: Union[str, Path], workers: int = 4) -> FrameDataset:
    """Decode numbered PNG/PPM frames from a directory in numeric order.
    :param workers: decoding threads; order of the result does not depend on it
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameIOError("not a directory", path=str(directory))
    paths = sorted(
        (p for p in directory.iterdir() if p.suffix.lower() in FRAME_SUFFIXES),
        key=_natural_key,
    )
    if not paths:
        raise FrameIOError("no PNG or PPM frames found", path=str(directory))
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        images = list(pool.map(_decode, paths))
    reference = images[0].shape
    for path, image in zip(paths, images):
        if image.shape != reference:
            raise FrameIOError(f"frame shape {image.shape} differs from {reference}", path=str(path))
    frames = [FrameRecord(id=i, data=image, path=str(path)) for i, (path, image) in enumerate(zip(paths, images))]
    logger.info("Loaded %d frames of shape %s from %s", len(frames), reference, directory)
    return FrameDataset(frames=frames, manifest={"source": str(directory)})


def preprocess(
    dataset: FrameDataset,
    crop: Optional[Tuple[int, int]] = None,
    downsample: int = 1
) -> FrameDataset:
    """Center crop to `crop` = (H, W), then box-filter downsample by an integer factor."""
    c, h, w = dataset.shape
    ch, cw = crop if crop is not None else (h, w)
    if ch > h or cw > w or ch < 1 or cw < 1:
        raise ShapeError(f"preprocess: crop {ch}x{cw} does not fit in {h}x{w}")
    if downsample < 1 or ch % downsample or cw % downsample:
        raise ShapeError(f"preprocess: {ch}x{cw} is not divisible by the downsample factor {downsample}")
    top, left = (h - ch) // 2, (w - cw) // 2
    frames = []
    for frame in dataset.frames:
        image = frame.data[:, top:top + ch, left:left + cw]
        if downsample > 1:
            image = image.reshape(c, ch // downsample, downsample, cw // downsample, downsample).mean(axis=(2, 4))
        frames.append(FrameRecord(id=frame.id, data=np.ascontiguousarray(image), path=frame.path))
    manifest = {"source": dataset.manifest.get("source", ""), "crop": f"{ch}x{cw}", "downsample": str(downsample)}
    return FrameDataset(frames=frames, manifest=manifest)


def write_frames(
    images: Sequence[np.ndarray],
    directory: Union[str, Path],
    ids: Optional[Sequence[int]] = None,
    workers: int = 4
) -> List[Path]:
    """Write (C, H, W) images in [0, 1] as 8-bit PNG files frame_00000.png, ..."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ids = list(ids) if ids is not None else list(range(len(images)))
    paths = [directory / f"frame_{i:05d}.png" for i in ids]

    def _write(item: Tuple[Path, np.ndarray]) -> None:
        path, image = item
        pixels = to_uint8(image).transpose(1, 2, 0)
        if pixels.shape[2] == 1:
            pixels = pixels[:, :, 0]
        try:
            Image.fromarray(pixels).save(path, format="PNG")
        except OSError as e:
            raise FrameIOError(f"cannot write frame: {e}", path=str(path))

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        list(pool.map(_write, zip(paths, images)))
    return paths
