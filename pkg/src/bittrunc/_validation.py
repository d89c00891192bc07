"""Input checks shared by the estimator wrappers."""
from __future__ import annotations

import numbers

import numpy as np

from .videopipe.frames import VideoClip


def check_bit_count(value, name: str, low: int, high: int) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if not low <= value <= high:
        raise ValueError(f"{name} must lie in {low}..{high}, got {value}")
    return int(value)


def check_float32_array(X) -> np.ndarray:
    """Float input as float32; NaN/Inf are allowed and left to the truncation policy."""
    arr = np.asarray(X)
    if arr.dtype.kind not in "fiub":
        raise TypeError(f"expected numeric input, got dtype {arr.dtype}")
    return np.asarray(arr, dtype=np.float32, order="C")


def check_byte_array(X) -> np.ndarray:
    arr = np.asarray(X)
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype.kind not in "iu":
        raise TypeError(f"expected 8-bit integer samples, got dtype {arr.dtype}")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ValueError("samples must lie in 0..255")
    return arr.astype(np.uint8)


def check_clip(X) -> VideoClip:
    if not isinstance(X, VideoClip):
        raise TypeError(f"expected a VideoClip, got {type(X).__name__}")
    return X
