"""Viewer-aware truncation policies and their application to a clip.

Every policy produces a :class:`PolicyDecision`: per frame and per plane, a
truncation level (0..8 LSBs per byte), either a scalar for the whole plane or
a per-sample map.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from ..bitcore import truncate_bytes_array
from .analysis import DEFAULT_VARIANCE_THRESHOLD, analyze_macroblocks, clip_plain_pct
from .frames import PLANES, FramePlanar420, VideoClip

Level = Union[int, np.ndarray]

LUMINANCE_LEVELS = {"normal": 0, "overcast": 3, "sunlight": 4}
ROI_OUTSIDE_K = 3
CONTENT_MAX_K = 4
# (minimum plain %, k)
DEFAULT_CONTENT_MAPPING = ((0.0, 0), (20.0, 1), (40.0, 2), (60.0, 3), (80.0, 4))


def policy_luminance(condition: str) -> int:
    try:
        return LUMINANCE_LEVELS[condition.lower()]
    except KeyError:
        raise ValueError(f"condition must be one of {sorted(LUMINANCE_LEVELS)}, got {condition!r}") from None


def validate_content_mapping(mapping: Sequence[tuple[float, int]]) -> tuple[tuple[float, int], ...]:
    pts = tuple((float(p), int(k)) for p, k in mapping)
    if not pts:
        raise ValueError("content mapping is empty")
    for (p0, k0), (p1, k1) in zip(pts, pts[1:]):
        if p1 <= p0:
            raise ValueError(f"breakpoints must be strictly increasing: {p0} then {p1}")
        if k1 < k0:
            raise ValueError(f"mapping is not monotone: plain% {p1} maps to {k1} < {k0}")
    return pts


def policy_content(plain_pct: float, mapping: Sequence[tuple[float, int]] = DEFAULT_CONTENT_MAPPING) -> int:
    """k for the highest breakpoint not above ``plain_pct``, clamped to 0..4."""
    pts = validate_content_mapping(mapping)
    k = 0
    for threshold, level in pts:
        if plain_pct >= threshold:
            k = level
    return min(max(k, 0), CONTENT_MAX_K)


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def clip(self, width: int, height: int) -> "Rect":
        x0, y0 = max(self.x, 0), max(self.y, 0)
        x1, y1 = min(self.x + self.w, width), min(self.y + self.h, height)
        return Rect(x0, y0, max(x1 - x0, 0), max(y1 - y0, 0))

    def chroma(self) -> "Rect":
        """Half-resolution rectangle covering every chroma sample the luma rectangle touches."""
        x0, y0 = self.x // 2, self.y // 2
        x1, y1 = math.ceil((self.x + self.w) / 2), math.ceil((self.y + self.h) / 2)
        return Rect(x0, y0, x1 - x0, y1 - y0)

    @property
    def empty(self) -> bool:
        return self.w <= 0 or self.h <= 0


@dataclass(frozen=True)
class RoiSpec:
    """Rectangles per frame index; frames with no entry have no ROI."""

    rects: Mapping[int, tuple[Rect, ...]] = field(default_factory=dict)

    def for_frame(self, index: int) -> tuple[Rect, ...]:
        return self.rects.get(index, ())

    @classmethod
    def parse(cls, text: str) -> "RoiSpec":
        rects: dict[int, list[Rect]] = {}
        last = -1
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 5:
                raise ValueError(f"ROI line {line_no}: expected 'frame_index x y w h'")
            try:
                idx, x, y, w, h = (int(p) for p in parts)
            except ValueError:
                raise ValueError(f"ROI line {line_no}: non-integer field") from None
            if idx < last:
                raise ValueError(f"ROI line {line_no}: frame index {idx} after {last}")
            if idx < 0 or w < 0 or h < 0:
                raise ValueError(f"ROI line {line_no}: negative frame index or size")
            last = idx
            rects.setdefault(idx, []).append(Rect(x, y, w, h))
        return cls({k: tuple(v) for k, v in rects.items()})

    @classmethod
    def load(cls, path: str | Path) -> "RoiSpec":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


def policy_roi(rects: Iterable[Rect], width: int, height: int, k_outside: int = ROI_OUTSIDE_K) -> dict[str, np.ndarray]:
    """Per-sample k maps: 0 inside any rectangle, ``k_outside`` elsewhere."""
    ky = np.full((height, width), k_outside, dtype=np.uint8)
    kc = np.full((height // 2, width // 2), k_outside, dtype=np.uint8)
    for rect in rects:
        r = rect.clip(width, height)
        if r.empty:
            continue
        ky[r.y:r.y + r.h, r.x:r.x + r.w] = 0
        c = r.chroma()
        kc[c.y:c.y + c.h, c.x:c.x + c.w] = 0
    return {"y": ky, "u": kc, "v": kc.copy()}


@dataclass(frozen=True)
class PolicyDecision:
    policy: str
    params: Mapping[str, object]
    levels: tuple[Mapping[str, Level], ...]

    def level_histogram(self, clip: VideoClip, planes: Sequence[str] = PLANES) -> np.ndarray:
        """Count of stored bytes at each level 0..8; planes left untruncated count at level 0."""
        counts = np.zeros(9, dtype=np.int64)
        for frame, lv in zip(clip, self.levels):
            for name in PLANES:
                size = frame.plane(name).size
                level = lv[name] if name in planes else 0
                if np.ndim(level) == 0:
                    counts[int(level)] += size
                else:
                    counts += np.bincount(np.asarray(level, dtype=np.int64).ravel(), minlength=9)
        return counts


def decide_luminance(clip: VideoClip, condition: str) -> PolicyDecision:
    k = policy_luminance(condition)
    return PolicyDecision("luminance", {"condition": condition, "k": k}, tuple({p: k for p in PLANES} for _ in clip))


def decide_content(
    clip: VideoClip,
    mapping: Sequence[tuple[float, int]] = DEFAULT_CONTENT_MAPPING,
    variance_threshold: float = DEFAULT_VARIANCE_THRESHOLD,
    per_frame: bool = False,
) -> PolicyDecision:
    """Clip-wide level from the average plain-macroblock percentage, or one level per frame."""
    mapping = validate_content_mapping(mapping)
    params: dict[str, object] = {"variance_threshold": variance_threshold, "per_frame": per_frame}
    if per_frame:
        pcts = [analyze_macroblocks(f, variance_threshold).plain_pct for f in clip]
        ks = [policy_content(p, mapping) for p in pcts]
        params["plain_pct"] = pcts
        params["k"] = ks
    else:
        pct = clip_plain_pct(clip, variance_threshold)
        ks = [policy_content(pct, mapping)] * len(clip)
        params["plain_pct"] = pct
        params["k"] = ks[0] if ks else 0
    return PolicyDecision("content", params, tuple({p: k for p in PLANES} for k in ks))


def decide_roi(clip: VideoClip, roi: RoiSpec, k_outside: int = ROI_OUTSIDE_K) -> PolicyDecision:
    levels = tuple(policy_roi(roi.for_frame(i), clip.width, clip.height, k_outside) for i in range(len(clip)))
    return PolicyDecision("roi", {"k_outside": k_outside, "frames_with_roi": len(roi.rects)}, levels)


def decide_uniform(clip: VideoClip, k: int) -> PolicyDecision:
    if not 0 <= k <= 8:
        raise ValueError("k must lie in 0..8")
    return PolicyDecision("uniform", {"k": k}, tuple({p: k for p in PLANES} for _ in clip))


def _apply_frame(frame: FramePlanar420, levels: Mapping[str, Level], planes: Sequence[str]) -> FramePlanar420:
    out = {}
    for name in PLANES:
        plane = frame.plane(name)
        if name not in planes:
            out[name] = plane.copy()
            continue
        level = levels[name]
        if np.ndim(level) and np.shape(level) != plane.shape:
            raise ValueError(f"{name} level map is {np.shape(level)}, plane is {plane.shape}")
        out[name] = truncate_bytes_array(plane, level)
    return FramePlanar420(**out)


def apply_policy(
    clip: VideoClip,
    decision: PolicyDecision,
    planes: Sequence[str] = PLANES,
    threads: int = 1,
) -> VideoClip:
    """Truncate every byte of the selected planes at its decided level."""
    if len(decision.levels) != len(clip):
        raise ValueError(f"decision covers {len(decision.levels)} frames, clip has {len(clip)}")
    bad = set(planes) - set(PLANES)
    if bad:
        raise ValueError(f"unknown planes {sorted(bad)}")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            frames = list(pool.map(lambda a: _apply_frame(a[0], a[1], planes), zip(clip, decision.levels)))
    else:
        frames = [_apply_frame(f, lv, planes) for f, lv in zip(clip, decision.levels)]
    return VideoClip(clip.width, clip.height, frames)
