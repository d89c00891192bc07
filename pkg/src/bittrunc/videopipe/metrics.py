"""PSNR and SSIM for 8-bit planes and I420 frames."""
from __future__ import annotations

import math

import numpy as np

from .frames import PLANES, FramePlanar420

PSNR_CAP = 99.0
PEAK = 255.0
K1, K2 = 0.01, 0.03
SSIM_WINDOW = 8


def _planes(a, b, planes: str) -> list[tuple[np.ndarray, np.ndarray]]:
    if isinstance(a, FramePlanar420) and isinstance(b, FramePlanar420):
        names = ("y",) if planes == "y" else PLANES
        pairs = [(a.plane(n), b.plane(n)) for n in names]
    else:
        pairs = [(np.asarray(a), np.asarray(b))]
    for x, y in pairs:
        if x.shape != y.shape:
            raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return pairs


def mse(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a.astype(np.int64) - b.astype(np.int64)
    return float(np.mean(d * d))


def _plane_psnr(x: np.ndarray, y: np.ndarray, cap: float) -> float:
    err = mse(x, y)
    if err == 0:
        return cap
    return min(10.0 * math.log10(PEAK * PEAK / err), cap)


def psnr(orig, trunc, planes: str = "y", cap: float = PSNR_CAP) -> float:
    """PSNR in dB; identical inputs give ``cap``.

    ``planes="all"`` averages the per-plane values weighted by sample count.
    """
    if planes not in ("y", "all"):
        raise ValueError("planes must be 'y' or 'all'")
    pairs = _planes(orig, trunc, planes)
    sizes = np.array([x.size for x, _ in pairs], dtype=np.float64)
    values = np.array([_plane_psnr(x, y, cap) for x, y in pairs])
    return float(values @ sizes / sizes.sum())


def identical(orig, trunc, planes: str = "y") -> bool:
    return all(np.array_equal(x, y) for x, y in _planes(orig, trunc, planes))


def _window_sums(x: np.ndarray, w: int) -> np.ndarray:
    c = np.zeros((x.shape[0] + 1, x.shape[1] + 1), dtype=np.int64)
    c[1:, 1:] = x.cumsum(0).cumsum(1)
    return c[w:, w:] - c[:-w, w:] - c[w:, :-w] + c[:-w, :-w]


def _plane_ssim(x: np.ndarray, y: np.ndarray, window: int) -> float:
    w = min(window, *x.shape)
    n = w * w
    xi, yi = x.astype(np.int64), y.astype(np.int64)
    sx, sy = _window_sums(xi, w), _window_sums(yi, w)
    sxx, syy, sxy = _window_sums(xi * xi, w), _window_sums(yi * yi, w), _window_sums(xi * yi, w)
    # everything scaled by n^2 so the window sums stay exact integers
    c1 = (K1 * PEAK) ** 2 * n * n
    c2 = (K2 * PEAK) ** 2 * n * n
    num = (2.0 * sx * sy + c1) * (2.0 * (n * sxy - sx * sy) + c2)
    den = (1.0 * sx * sx + 1.0 * sy * sy + c1) * (1.0 * (n * sxx - sx * sx) + (n * syy - sy * sy) + c2)
    return float(np.mean(num / den))


def ssim(orig, trunc, planes: str = "y", window: int = SSIM_WINDOW) -> float:
    """Mean SSIM over all ``window`` x ``window`` positions (stride 1)."""
    if planes not in ("y", "all"):
        raise ValueError("planes must be 'y' or 'all'")
    pairs = _planes(orig, trunc, planes)
    sizes = np.array([x.size for x, _ in pairs], dtype=np.float64)
    values = np.array([_plane_ssim(x, y, window) for x, y in pairs])
    return float(values @ sizes / sizes.sum())
