"""Fraction-bit truncation of float32 tensors with error and power reporting.

File formats
------------
``TRNT`` container::

    "TRNT" | version 0x01 | dtype 0x01 (float32) | rank (u8) | rank x u32 LE dims | float32 LE payload

Raw format: headerless little-endian float32, shape supplied by the caller.
"""
from __future__ import annotations

import csv
import io
import json
import math
import struct
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bitcore import FRACTION_BITS, TruncationSpec, truncate_float32_array
from .powermodel import CalibrationTable, PowerParams, savings

MAGIC = b"TRNT"
VERSION = 1
DTYPE_FLOAT32 = 1
SWEEP_COLUMNS = ("n", "max_abs_err", "max_rel_err", "mse", "bound", "savings_pct")


class TensorFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TensorBuffer:
    data: np.ndarray
    name: str | None = None

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32, order="C")
        if any(d < 1 for d in arr.shape):
            raise ValueError(f"tensor dims must be >= 1, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def payload(self) -> bytes:
        return self.data.astype("<f4", copy=False).tobytes()


def _check_n(n: int) -> None:
    if not 0 <= n <= FRACTION_BITS:
        raise ValueError(f"n must lie in 0..{FRACTION_BITS} (fraction bits only), got {n}")


def truncate_tensor(t: TensorBuffer, n: int, nonfinite: str = "preserve") -> TensorBuffer:
    _check_n(n)
    return TensorBuffer(truncate_float32_array(t.data, n, nonfinite), t.name)


def relative_error_bound(n: int) -> float:
    """Worst-case |dx/x| for ``n`` truncated fraction LSBs of a normalised float."""
    _check_n(n)
    return 0.0 if n == 0 else 2.0 ** (n - 24)


@dataclass(frozen=True)
class TruncationReport:
    n: int
    count: int
    max_abs_err: float
    max_rel_err: float
    mse: float
    bound: float
    savings_pct: float
    nonfinite_count: int
    nonfinite_policy: str

    def row(self) -> dict:
        return {c: getattr(self, c) for c in SWEEP_COLUMNS}


def error_stats(
    orig: TensorBuffer,
    trunc: TensorBuffer,
    n: int,
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
    nonfinite: str = "preserve",
) -> TruncationReport:
    """Compare a tensor with its truncated version.

    Errors are taken over elements finite in both tensors. Relative error
    skips exact zeros, whose error shows up in ``max_abs_err`` only.
    """
    _check_n(n)
    if orig.shape != trunc.shape:
        raise ValueError(f"shape mismatch: {orig.shape} vs {trunc.shape}")
    a = orig.data.astype(np.float64).ravel()
    b = trunc.data.astype(np.float64).ravel()
    finite = np.isfinite(a) & np.isfinite(b)
    diff = np.abs(a[finite] - b[finite])
    base = np.abs(a[finite])
    nz = base > 0
    return TruncationReport(
        n=n,
        count=orig.size,
        max_abs_err=float(diff.max()) if diff.size else 0.0,
        max_rel_err=float((diff[nz] / base[nz]).max()) if nz.any() else 0.0,
        mse=float(np.mean(diff * diff)) if diff.size else 0.0,
        bound=relative_error_bound(n),
        savings_pct=savings(TruncationSpec.word(n), model, table, params),
        nonfinite_count=int((~np.isfinite(a)).sum()),
        nonfinite_policy=nonfinite,
    )


def sweep(
    t: TensorBuffer,
    n_list: Iterable[int],
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
    nonfinite: str = "preserve",
) -> list[TruncationReport]:
    reports = []
    for n in n_list:
        out = truncate_tensor(t, n, nonfinite)
        reports.append(error_stats(t, out, n, model, table, params, nonfinite))
    return reports


def sweep_to_csv(reports: Sequence[TruncationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in reports:
        w.writerow([r.n] + [repr(getattr(r, c)) for c in SWEEP_COLUMNS[1:]])
    return buf.getvalue()


def sweep_to_json(reports: Sequence[TruncationReport], indent: int | None = 2) -> str:
    return json.dumps([asdict(r) for r in reports], indent=indent)


def parse_n_range(text: str) -> list[int]:
    """``"17"``, ``"0..23"`` or ``"1,8,16"`` into a list of levels."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(p) for p in part.split("..", 1))
            if hi < lo:
                raise ValueError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValueError("no levels given")
    for n in out:
        _check_n(n)
    return out


# -- I/O ------------------------------------------------------------------------


def encode_trnt(t: TensorBuffer) -> bytes:
    rank = t.data.ndim
    if rank > 255:
        raise TensorFormatError("rank does not fit in one byte")
    header = MAGIC + bytes([VERSION, DTYPE_FLOAT32, rank]) + struct.pack(f"<{rank}I", *t.shape)
    return header + t.payload()


def decode_trnt(data: bytes, name: str | None = None) -> TensorBuffer:
    if len(data) < 7 or data[:4] != MAGIC:
        raise TensorFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    version, dtype, rank = data[4], data[5], data[6]
    if version != VERSION:
        raise TensorFormatError(f"unsupported version {version}")
    if dtype != DTYPE_FLOAT32:
        raise TensorFormatError(f"unsupported dtype code {dtype}")
    head = 7 + 4 * rank
    if len(data) < head:
        raise TensorFormatError("header truncated")
    dims = struct.unpack(f"<{rank}I", data[7:head])
    count = math.prod(dims)
    payload = data[head:]
    if len(payload) != 4 * count:
        raise TensorFormatError(f"header declares {count} elements, payload holds {len(payload) / 4:g}")
    arr = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(dims)
    return TensorBuffer(arr, name)


def decode_raw(data: bytes, shape: Sequence[int], name: str | None = None) -> TensorBuffer:
    count = math.prod(shape)
    if len(data) != 4 * count:
        raise TensorFormatError(f"shape {tuple(shape)} needs {4 * count} bytes, got {len(data)}")
    return TensorBuffer(np.frombuffer(data, dtype="<f4").astype(np.float32).reshape(tuple(shape)), name)


def load_tensor(path: str | Path, shape: Sequence[int] | None = None, fmt: str = "auto") -> TensorBuffer:
    """Read a tensor file.

    ``fmt="auto"`` reads a TRNT container when the magic matches and falls
    back to raw float32 only when ``shape`` is given.
    """
    path = Path(path)
    data = path.read_bytes()
    if fmt == "auto":
        fmt = "trnt" if data[:4] == MAGIC or shape is None else "raw"
    if fmt == "trnt":
        return decode_trnt(data, path.stem)
    if fmt == "raw":
        if shape is None:
            raise TensorFormatError("raw float32 input needs a shape")
        return decode_raw(data, shape, path.stem)
    raise ValueError(f"unknown tensor format {fmt!r}")


def save_tensor(t: TensorBuffer, path: str | Path, fmt: str = "trnt") -> None:
    if fmt == "trnt":
        Path(path).write_bytes(encode_trnt(t))
    elif fmt == "raw":
        Path(path).write_bytes(t.payload())
    else:
        raise ValueError(f"unknown tensor format {fmt!r}")
