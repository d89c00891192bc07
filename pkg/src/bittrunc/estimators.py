"""scikit-learn compatible transformers around the truncation rules.

They hold no learned state beyond what ``fit`` measures (for the
content-aware policy, the clip's plain-macroblock percentage), so they slot
into pipelines and ``clone``/``get_params`` work as usual.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import bitcore
from ._validation import check_bit_count, check_byte_array, check_clip, check_float32_array
from .videopipe import policies
from .videopipe.analysis import DEFAULT_VARIANCE_THRESHOLD, clip_plain_pct
from .videopipe.frames import PLANES


class FloatTruncator(TransformerMixin, BaseEstimator):
    """Replace the ``n_bits`` fraction LSBs of float32 values by the optimal dummy pattern."""

    def __init__(self, n_bits=17, nonfinite="preserve"):
        self.n_bits = n_bits
        self.nonfinite = nonfinite

    def fit(self, X=None, y=None):
        check_bit_count(self.n_bits, "n_bits", 0, bitcore.FRACTION_BITS)
        if self.nonfinite not in bitcore.NONFINITE_POLICIES:
            raise ValueError(f"nonfinite must be one of {bitcore.NONFINITE_POLICIES}")
        self.index_set_ = bitcore.TruncationIndexSet.contiguous(self.n_bits)
        return self

    def transform(self, X):
        check_is_fitted(self, "index_set_")
        return bitcore.truncate_float32_array(check_float32_array(X), self.index_set_, self.nonfinite)

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.input_tags.allow_nan = True
        tags.requires_fit = False
        return tags


class ByteTruncator(TransformerMixin, BaseEstimator):
    def __init__(self, n_bits=3):
        self.n_bits = n_bits

    def fit(self, X=None, y=None):
        self.n_bits_ = check_bit_count(self.n_bits, "n_bits", 0, 8)
        return self

    def transform(self, X):
        check_is_fitted(self, "n_bits_")
        return bitcore.truncate_bytes_array(check_byte_array(X), self.n_bits_)


class _ClipPolicy(TransformerMixin, BaseEstimator):
    """Shared transform for policies that map a VideoClip to a truncated VideoClip."""

    def _decide(self, clip):
        raise NotImplementedError

    def decide(self, X):
        return self._decide(check_clip(X))

    def transform(self, X):
        clip = check_clip(X)
        self.decision_ = self._decide(clip)
        planes = PLANES if not getattr(self, "y_only", False) else ("y",)
        return policies.apply_policy(clip, self.decision_, planes)


class LuminanceTruncator(_ClipPolicy):
    def __init__(self, condition="overcast", y_only=False):
        self.condition = condition
        self.y_only = y_only

    def fit(self, X=None, y=None):
        self.k_ = policies.policy_luminance(self.condition)
        return self

    def _decide(self, clip):
        check_is_fitted(self, "k_")
        return policies.decide_luminance(clip, self.condition)


class ContentAwareTruncator(_ClipPolicy):
    """Pick the truncation level from the plain-macroblock percentage seen in ``fit``."""

    def __init__(self, mapping=policies.DEFAULT_CONTENT_MAPPING, variance_threshold=DEFAULT_VARIANCE_THRESHOLD,
                 y_only=False):
        self.mapping = mapping
        self.variance_threshold = variance_threshold
        self.y_only = y_only

    def fit(self, X, y=None):
        clip = check_clip(X)
        self.plain_pct_ = clip_plain_pct(clip, self.variance_threshold)
        self.k_ = policies.policy_content(self.plain_pct_, self.mapping)
        return self

    def _decide(self, clip):
        check_is_fitted(self, "k_")
        params = {"variance_threshold": self.variance_threshold, "plain_pct": self.plain_pct_, "k": self.k_}
        return policies.PolicyDecision("content", params, tuple({p: self.k_ for p in PLANES} for _ in clip))


class RoiTruncator(_ClipPolicy):
    def __init__(self, roi=None, k_outside=policies.ROI_OUTSIDE_K, y_only=False):
        self.roi = roi
        self.k_outside = k_outside
        self.y_only = y_only

    def fit(self, X=None, y=None):
        self.k_outside_ = check_bit_count(self.k_outside, "k_outside", 0, 8)
        self.roi_ = self.roi if self.roi is not None else policies.RoiSpec()
        return self

    def _decide(self, clip):
        check_is_fitted(self, "roi_")
        return policies.decide_roi(clip, self.roi_, self.k_outside_)
