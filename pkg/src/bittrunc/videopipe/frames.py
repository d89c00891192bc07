"""Raw planar 4:2:0 (I420) frames and clips."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PLANES = ("y", "u", "v")


@dataclass(frozen=True)
class FramePlanar420:
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        for name in PLANES:
            plane = getattr(self, name)
            if not isinstance(plane, np.ndarray) or plane.dtype != np.uint8 or plane.ndim != 2:
                raise ValueError(f"{name} plane must be a 2-D uint8 array")
        h, w = self.y.shape
        if h % 2 or w % 2:
            raise ValueError(f"I420 needs even dimensions, got {w}x{h}")
        for name in ("u", "v"):
            if getattr(self, name).shape != (h // 2, w // 2):
                raise ValueError(f"{name} plane must be {w // 2}x{h // 2}")

    @property
    def width(self) -> int:
        return self.y.shape[1]

    @property
    def height(self) -> int:
        return self.y.shape[0]

    def plane(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def planes(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in PLANES}

    @classmethod
    def from_luma(cls, y: np.ndarray, chroma: int = 128) -> "FramePlanar420":
        y = np.asarray(y, dtype=np.uint8)
        h, w = y.shape
        c = np.full((h // 2, w // 2), chroma, dtype=np.uint8)
        return cls(y, c, c.copy())

    def tobytes(self) -> bytes:
        return self.y.tobytes() + self.u.tobytes() + self.v.tobytes()

    def __eq__(self, other):
        if not isinstance(other, FramePlanar420):
            return NotImplemented
        return all(np.array_equal(getattr(self, p), getattr(other, p)) for p in PLANES)

    __hash__ = None


@dataclass
class VideoClip:
    width: int
    height: int
    frames: list[FramePlanar420] = field(default_factory=list)

    def __post_init__(self):
        check_dimensions(self.width, self.height)
        for i, f in enumerate(self.frames):
            if (f.width, f.height) != (self.width, self.height):
                raise ValueError(f"frame {i} is {f.width}x{f.height}, clip is {self.width}x{self.height}")

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    @property
    def frame_size(self) -> int:
        return frame_size(self.width, self.height)


def check_dimensions(width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise ValueError("dimensions must be positive")
    if width % 2 or height % 2:
        raise ValueError(f"I420 needs even dimensions, got {width}x{height}")


def frame_size(width: int, height: int) -> int:
    return width * height * 3 // 2


def decode_yuv(data: bytes, width: int, height: int) -> VideoClip:
    check_dimensions(width, height)
    size = frame_size(width, height)
    if len(data) % size:
        raise ValueError(f"{len(data)} bytes is not a whole number of {width}x{height} I420 frames ({size} bytes each)")
    buf = np.frombuffer(data, dtype=np.uint8)
    ny, nc = width * height, (width // 2) * (height // 2)
    frames = []
    for off in range(0, len(buf), size):
        y = buf[off:off + ny].reshape(height, width).copy()
        u = buf[off + ny:off + ny + nc].reshape(height // 2, width // 2).copy()
        v = buf[off + ny + nc:off + size].reshape(height // 2, width // 2).copy()
        frames.append(FramePlanar420(y, u, v))
    return VideoClip(width, height, frames)


def load_yuv(path: str | Path, width: int, height: int) -> VideoClip:
    return decode_yuv(Path(path).read_bytes(), width, height)


def save_yuv(clip: VideoClip, path: str | Path) -> None:
    with open(path, "wb") as fh:
        for frame in clip:
            fh.write(frame.tobytes())
