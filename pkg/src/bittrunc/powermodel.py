"""Read-power and savings estimates for a truncation configuration.

Two savings models are provided:

* ``linear``: a constant per-bit saving (per byte-lane bit in byte mode, per
  column in word mode) taken from the measured averages.
* ``anchored``: piecewise-linear interpolation through measured operating
  points held in a :class:`CalibrationTable`.

Default figures are post-layout measurements of a 130 nm design; load a
calibration file to model another technology.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bitcore import Mode, TruncationSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODELS = ("linear", "anchored")


@dataclass(frozen=True)
class PowerParams:
    byte_per_bit_uW: float = 296.0
    byte_per_bit_pct: float = 11.90
    word_per_bit_uW: float = 71.0
    word_per_bit_pct: float = 2.87
    write_power_mW: float = 2.35
    data_dep_zero_byte_uW: float = 90.0
    data_dep_zero_byte_pct: float = 3.6
    data_dep_ff_byte_uW: float = 60.0
    data_dep_ff_byte_pct: float = 2.2
    manager_overhead_uW: float = 1.1
    manager_overhead_pct: float = 0.47
    base_read_power_uW: float | None = None

    def __post_init__(self):
        for name, value in vars(self).items():
            if value is not None and value < 0:
                raise ValueError(f"{name} must be non-negative")
        # the absolute read power is not published; back it out of the byte-mode pair
        if self.base_read_power_uW is None:
            object.__setattr__(self, "base_read_power_uW", self.byte_per_bit_uW / (self.byte_per_bit_pct / 100))
        if self.word_per_bit_pct > 0:
            from_word = self.word_per_bit_uW / (self.word_per_bit_pct / 100)
            if abs(from_word - self.base_read_power_uW) > 0.01 * self.base_read_power_uW:
                raise ValueError(
                    f"per-bit pairs disagree on base read power: {self.base_read_power_uW:.1f} vs {from_word:.1f} uW"
                )


@dataclass(frozen=True)
class CalibrationTable:
    """Measured (bits truncated, savings %) anchors per mode."""

    anchors: Mapping[Mode, tuple[tuple[int, float], ...]] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for mode, points in self.anchors.items():
            pts = tuple((int(k), float(v)) for k, v in points)
            for (k0, v0), (k1, v1) in zip(pts, pts[1:]):
                if not (k1 > k0 and v1 > v0):
                    raise ValueError(f"{Mode(mode).value} anchors must increase in both coordinates: {pts}")
            clean[Mode(mode)] = pts
        object.__setattr__(self, "anchors", clean)

    @classmethod
    def default(cls) -> "CalibrationTable":
        return cls({
            Mode.BYTE: ((0, 0.0), (3, 34.93), (4, 47.02)),
            Mode.WORD: ((0, 0.0), (17, 51.69), (21, 66.08)),
        })

    @classmethod
    def from_toml(cls, text: str) -> "CalibrationTable":
        doc = tomllib.loads(text)
        anchors = {}
        for mode in Mode:
            section = doc.get(mode.value)
            if section is None:
                continue
            if "anchors" not in section:
                raise ValueError(f"[{mode.value}] section has no 'anchors' key")
            anchors[mode] = tuple(tuple(p) for p in section["anchors"])
        if not anchors:
            raise ValueError("calibration file defines no [byte] or [word] anchors")
        return cls(anchors)

    @classmethod
    def load(cls, path: str | Path) -> "CalibrationTable":
        return cls.from_toml(Path(path).read_text(encoding="utf-8"))

    def to_toml(self) -> str:
        lines = []
        for mode, pts in self.anchors.items():
            body = ", ".join(f"[{k}, {v!r}]" for k, v in pts)
            lines += [f"[{mode.value}]", f"anchors = [{body}]", ""]
        return "\n".join(lines)


def savings_linear(spec: TruncationSpec, params: PowerParams | None = None) -> float:
    params = params or PowerParams()
    per_bit = params.byte_per_bit_pct if spec.mode is Mode.BYTE else params.word_per_bit_pct
    return float(min(max(spec.k * per_bit, 0.0), 100.0))


def savings_anchored(spec: TruncationSpec, table: CalibrationTable | None = None) -> float:
    table = table or CalibrationTable.default()
    pts = table.anchors.get(spec.mode)
    if not pts:
        raise ValueError(f"calibration table has no {spec.mode.value} anchors")
    if len(pts) == 1:
        return float(min(max(pts[0][1], 0.0), 100.0))
    ks = [k for k, _ in pts]
    vs = [v for _, v in pts]
    k = spec.k
    if k <= ks[0]:
        (k0, v0), (k1, v1) = pts[0], pts[1]
    elif k >= ks[-1]:
        (k0, v0), (k1, v1) = pts[-2], pts[-1]
    else:
        return float(min(max(np.interp(k, ks, vs), 0.0), 100.0))
    value = v0 + (v1 - v0) * (k - k0) / (k1 - k0)
    return float(min(max(value, 0.0), 100.0))


def savings(
    spec: TruncationSpec,
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
) -> float:
    if model == "linear":
        return savings_linear(spec, params)
    if model == "anchored":
        return savings_anchored(spec, table)
    raise ValueError(f"model must be one of {MODELS}, got {model!r}")


def aggregate_savings(
    levels,
    mode: Mode = Mode.BYTE,
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
) -> float:
    """Mean savings over a map of per-byte (or per-word) truncation levels.

    ``levels`` may be an array, or an iterable of arrays (for example one per
    plane and frame); every element counts once.
    """
    mode = Mode(mode)
    counts = np.zeros(mode.max_bits + 1, dtype=np.int64)
    arrays = [levels] if isinstance(levels, np.ndarray) or np.isscalar(levels) else list(levels)
    for arr in arrays:
        arr = np.asarray(arr).ravel()
        if arr.size == 0:
            continue
        if arr.min() < 0 or arr.max() > mode.max_bits:
            raise ValueError(f"levels must lie in 0..{mode.max_bits}")
        counts += np.bincount(arr.astype(np.int64), minlength=mode.max_bits + 1)
    return savings_from_histogram(counts, mode, model, table, params)


def savings_from_histogram(
    counts,
    mode: Mode = Mode.BYTE,
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
) -> float:
    """Like :func:`aggregate_savings` but from counts of elements at each level 0..max."""
    mode = Mode(mode)
    counts = np.asarray(counts, dtype=np.int64)
    if counts.shape != (mode.max_bits + 1,):
        raise ValueError(f"expected {mode.max_bits + 1} level counts")
    total = counts.sum()
    if total == 0:
        raise ValueError("truncation map is empty")
    per_level = np.array([savings(TruncationSpec(mode, k), model, table, params) for k in range(mode.max_bits + 1)])
    return float(counts @ per_level / total)


def _byte_class(value: int) -> str:
    if value == 0x00:
        return "zero"
    if value == 0xFF:
        return "ff"
    return "other"


def read_power_estimate(
    spec: TruncationSpec,
    data_pattern: Sequence[int] | None = None,
    params: PowerParams | None = None,
) -> float:
    """Read power in microwatts.

    ``data_pattern`` gives the four stored byte values, least significant
    first. In word mode each truncated column then saves the 0x00 or 0xFF
    data-dependent figure for its byte, or the word-mode average otherwise.
    Byte mode always uses the byte-mode average.
    """
    params = params or PowerParams()
    base = params.base_read_power_uW
    if spec.mode is Mode.BYTE:
        return max(base - spec.k * params.byte_per_bit_uW, 0.0)
    if data_pattern is None:
        return max(base - spec.k * params.word_per_bit_uW, 0.0)
    if len(data_pattern) != 4:
        raise ValueError("data_pattern needs four byte values")
    per_class = {
        "zero": params.data_dep_zero_byte_uW,
        "ff": params.data_dep_ff_byte_uW,
        "other": params.word_per_bit_uW,
    }
    saved = sum(per_class[_byte_class(int(data_pattern[col // 8]))] for col in range(spec.k))
    return max(base - saved, 0.0)


def write_power_mW(params: PowerParams | None = None) -> float:
    """Write power does not depend on the truncation level."""
    return (params or PowerParams()).write_power_mW
