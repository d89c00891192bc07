"""Per-frame quality plus aggregate power savings for a policy run."""
from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..bitcore import Mode
from ..powermodel import CalibrationTable, PowerParams, savings_from_histogram
from .frames import PLANES, VideoClip
from .metrics import PSNR_CAP, identical, psnr, ssim
from .policies import PolicyDecision

CSV_COLUMNS = ("frame", "psnr_db", "ssim", "identical", "savings_pct")


@dataclass(frozen=True)
class FrameQuality:
    index: int
    psnr_db: float
    ssim: float
    identical: bool


@dataclass
class QualityReport:
    policy: str
    params: dict
    model: str
    metric_planes: str
    truncated_planes: tuple[str, ...]
    frames: list[FrameQuality] = field(default_factory=list)
    mean_psnr_db: float = PSNR_CAP
    mean_ssim: float = 1.0
    savings_pct: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["truncated_planes"] = list(self.truncated_planes)
        d["params"] = _jsonable(self.params)
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for f in self.frames:
            w.writerow([f.index, repr(f.psnr_db), repr(f.ssim), int(f.identical), repr(self.savings_pct)])
        all_identical = all(f.identical for f in self.frames)
        w.writerow(["mean", repr(self.mean_psnr_db), repr(self.mean_ssim), int(all_identical), repr(self.savings_pct)])
        return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def quality_report(
    orig: VideoClip,
    truncated: VideoClip,
    decision: PolicyDecision,
    planes: Sequence[str] = PLANES,
    metric_planes: str = "y",
    model: str = "anchored",
    table: CalibrationTable | None = None,
    params: PowerParams | None = None,
    cap: float = PSNR_CAP,
    threads: int = 1,
) -> QualityReport:
    if len(orig) != len(truncated):
        raise ValueError("clips differ in frame count")

    def one(i):
        a, b = orig[i], truncated[i]
        return FrameQuality(i, psnr(a, b, metric_planes, cap), ssim(a, b, metric_planes), identical(a, b, metric_planes))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            frames = list(pool.map(one, range(len(orig))))
    else:
        frames = [one(i) for i in range(len(orig))]

    hist = decision.level_histogram(orig, planes)
    saved = savings_from_histogram(hist, Mode.BYTE, model, table, params) if hist.sum() else 0.0
    return QualityReport(
        policy=decision.policy,
        params=dict(decision.params),
        model=model,
        metric_planes=metric_planes,
        truncated_planes=tuple(planes),
        frames=frames,
        mean_psnr_db=float(np.mean([f.psnr_db for f in frames])) if frames else cap,
        mean_ssim=float(np.mean([f.ssim for f in frames])) if frames else 1.0,
        savings_pct=saved,
    )
