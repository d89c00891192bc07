from .analysis import MacroblockGrid, analyze_macroblocks, classify_variance, clip_plain_pct
from .frames import FramePlanar420, VideoClip, decode_yuv, load_yuv, save_yuv
from .metrics import PSNR_CAP, mse, psnr, ssim
from .policies import (
    DEFAULT_CONTENT_MAPPING,
    PolicyDecision,
    Rect,
    RoiSpec,
    apply_policy,
    decide_content,
    decide_luminance,
    decide_roi,
    decide_uniform,
    policy_content,
    policy_luminance,
    policy_roi,
)
from .report import FrameQuality, QualityReport, quality_report

__all__ = [
    "DEFAULT_CONTENT_MAPPING", "FramePlanar420", "FrameQuality", "MacroblockGrid", "PSNR_CAP", "PolicyDecision",
    "QualityReport", "Rect", "RoiSpec", "VideoClip", "analyze_macroblocks", "apply_policy", "classify_variance",
    "clip_plain_pct", "decide_content", "decide_luminance", "decide_roi", "decide_uniform", "decode_yuv",
    "load_yuv", "mse", "policy_content", "policy_luminance", "policy_roi", "psnr", "quality_report",
    "save_yuv", "ssim",
]
