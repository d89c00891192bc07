import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import FunctionTransformer

from bittrunc.estimators import (
    ByteTruncator,
    ContentAwareTruncator,
    FloatTruncator,
    LuminanceTruncator,
    RoiTruncator,
)
from bittrunc.videopipe import Rect, RoiSpec


class TestFloatTruncator:
    def test_transform(self):
        out = FloatTruncator(n_bits=23).fit_transform(np.array([[1.0, -2.0]]))
        assert out.dtype == np.float32
        assert out.tolist() == [[1.5, -3.0]]

    def test_params_and_clone(self):
        est = FloatTruncator(n_bits=9, nonfinite="hardware")
        assert est.get_params() == {"n_bits": 9, "nonfinite": "hardware"}
        c = clone(est).set_params(n_bits=3)
        assert c.n_bits == 3 and est.n_bits == 9

    def test_validation(self):
        with pytest.raises(ValueError):
            FloatTruncator(n_bits=24).fit()
        with pytest.raises(TypeError):
            FloatTruncator(n_bits=2.5).fit()
        with pytest.raises(ValueError):
            FloatTruncator(nonfinite="round").fit()
        with pytest.raises(NotFittedError):
            FloatTruncator().transform([1.0])

    def test_nan_passthrough(self):
        out = FloatTruncator(n_bits=5).fit_transform(np.array([np.nan, np.inf, 1.0]))
        assert np.isnan(out[0]) and np.isinf(out[1])

    def test_in_pipeline(self):
        pipe = make_pipeline(FunctionTransformer(np.abs), FloatTruncator(n_bits=23))
        assert pipe.fit_transform(np.array([[-1.0]])).tolist() == [[1.5]]


class TestByteTruncator:
    def test_transform(self):
        out = ByteTruncator(3).fit_transform(np.array([0x55, 0xFF], dtype=np.uint8))
        assert out.tolist() == [0x54, 0xFC]

    def test_int_input(self):
        assert ByteTruncator(8).fit_transform([[0, 255]]).tolist() == [[0x80, 0x80]]
        with pytest.raises(ValueError):
            ByteTruncator(1).fit_transform([300])
        with pytest.raises(ValueError):
            ByteTruncator(9).fit([0])


class TestClipPolicies:
    def test_luminance(self, noise_clip):
        est = LuminanceTruncator("sunlight")
        out = est.fit_transform(noise_clip)
        assert est.k_ == 4
        assert np.all(out[0].y & 0xF == 0x8)

    def test_content_fit_measures_plain(self, gray_clip, noise_clip):
        est = ContentAwareTruncator().fit(gray_clip)
        assert est.plain_pct_ == 100.0 and est.k_ == 4
        assert ContentAwareTruncator().fit(noise_clip).k_ == 0
        out = est.transform(gray_clip)
        assert np.all(out[0].y == 0x88)

    def test_content_not_fitted(self, gray_clip):
        with pytest.raises(NotFittedError):
            ContentAwareTruncator().transform(gray_clip)

    def test_roi_y_only(self, noise_clip):
        est = RoiTruncator(RoiSpec({0: (Rect(0, 0, 32, 48),)}), y_only=True)
        out = est.fit_transform(noise_clip)
        assert np.array_equal(out[0].y[:, :32], noise_clip[0].y[:, :32])
        assert np.array_equal(out[0].u, noise_clip[0].u)
        assert est.decision_.policy == "roi"

    def test_rejects_arrays(self):
        with pytest.raises(TypeError):
            LuminanceTruncator().fit().transform(np.zeros((4, 4)))
