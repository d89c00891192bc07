"""16x16 macroblock variance analysis on the luma plane."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import FramePlanar420, VideoClip

MB = 16
DEFAULT_VARIANCE_THRESHOLD = 100.0
# plain% at or above these marks a clip as low / medium variance
DEFAULT_CLASS_BREAKPOINTS = (60.0, 30.0)


@dataclass(frozen=True)
class MacroblockGrid:
    variances: np.ndarray
    plain: np.ndarray
    threshold: float

    @property
    def n_blocks(self) -> int:
        return self.variances.size

    @property
    def plain_pct(self) -> float:
        return 100.0 * float(self.plain.sum()) / self.n_blocks


def analyze_macroblocks(frame: FramePlanar420 | np.ndarray, variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD) -> MacroblockGrid:
    """Population variance of every 16x16 luma block; edge blocks use whatever pixels remain."""
    if variance_threshold < 0:
        raise ValueError("variance threshold must be non-negative")
    y = frame.y if isinstance(frame, FramePlanar420) else np.asarray(frame)
    h, w = y.shape
    rows, cols = -(-h // MB), -(-w // MB)
    var = np.empty((rows, cols))
    yf = y.astype(np.float64)
    for r in range(rows):
        for c in range(cols):
            var[r, c] = yf[r * MB:(r + 1) * MB, c * MB:(c + 1) * MB].var()
    return MacroblockGrid(var, var < variance_threshold, float(variance_threshold))


def clip_plain_pct(clip: VideoClip, variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD) -> float:
    """Average plain-macroblock percentage over all frames of a clip."""
    if len(clip) == 0:
        raise ValueError("clip has no frames")
    return float(np.mean([analyze_macroblocks(f, variance_threshold).plain_pct for f in clip]))


def classify_variance(plain_pct: float, breakpoints: tuple[float, float] = DEFAULT_CLASS_BREAKPOINTS) -> str:
    low, medium = breakpoints
    if medium > low:
        raise ValueError("breakpoints are (low_min_plain_pct, medium_min_plain_pct) with low >= medium")
    if plain_pct >= low:
        return "low"
    if plain_pct >= medium:
        return "medium"
    return "high"
