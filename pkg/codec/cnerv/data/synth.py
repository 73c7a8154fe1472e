import math
from typing import Literal
import numpy as np
from .frames import FrameDataset, FrameRecord

SynthKind = Literal["moving-gradient", "bouncing-rect", "static"]


def _smooth_background(rng: np.random.Generator, c: int, h: int, w: int) -> np.ndarray:
    y = np.linspace(0.0, 1.0, h)[:, None]
    x = np.linspace(0.0, 1.0, w)[None, :]
    image = np.empty((c, h, w))
    for ch in range(c):
        fy, fx = rng.uniform(0.5, 2.0, size=2)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        image[ch] = 0.35 + 0.25 * np.sin(2.0 * math.pi * (fy * y + fx * x) + phase)
    return image


def _quantize(image: np.ndarray) -> np.ndarray:
    # frames live on the 8-bit grid so PNG round trips are exact
    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def synth_toy_video(kind: SynthKind, n: int, H: int, W: int, seed: int = 0, C: int = 3) -> FrameDataset:
    """Procedural video with controllable temporal coherence.
    :param kind: "static" (identical frames), "moving-gradient" (drifting sinusoidal ramp)
    or "bouncing-rect" (a rectangle bouncing over a fixed background)
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    frames = []
    if kind == "static":
        image = _quantize(_smooth_background(rng, C, H, W))
        frames = [image.copy() for _ in range(n)]
    elif kind == "moving-gradient":
        y = np.arange(H)[:, None] / H
        x = np.arange(W)[None, :] / W
        freq = rng.uniform(0.5, 1.5, size=(C, 2))
        phase = rng.uniform(0.0, 2.0 * math.pi, size=C)
        speed = rng.uniform(0.1, 0.3, size=C)
        for t in range(n):
            image = np.empty((C, H, W))
            for ch in range(C):
                drift = 2.0 * math.pi * speed[ch] * t
                arg = 2.0 * math.pi * (freq[ch, 0] * y + freq[ch, 1] * x) + phase[ch] + drift
                image[ch] = 0.5 + 0.4 * np.sin(arg)
            frames.append(_quantize(image))
    elif kind == "bouncing-rect":
        background = _smooth_background(rng, C, H, W)
        rh, rw = max(1, H // 4), max(1, W // 4)
        color = rng.uniform(0.6, 1.0, size=C)
        top = int(rng.integers(0, H - rh + 1))
        left = int(rng.integers(0, W - rw + 1))
        vy, vx = (int(v) for v in rng.choice([-2, -1, 1, 2], size=2))
        for _ in range(n):
            image = background.copy()
            image[:, top:top + rh, left:left + rw] = color[:, None, None]
            frames.append(_quantize(image))
            if not 0 <= top + vy <= H - rh:
                vy = -vy
            if not 0 <= left + vx <= W - rw:
                vx = -vx
            top = min(max(top + vy, 0), H - rh)
            left = min(max(left + vx, 0), W - rw)
    else:
        raise ValueError(f"unknown synthetic video kind '{kind}'")
    records = [FrameRecord(id=i, data=image) for i, image in enumerate(frames)]
    return FrameDataset(frames=records, manifest={"source": f"synth:{kind}:{n}x{C}x{H}x{W}:seed={seed}"})
