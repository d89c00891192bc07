"""Emulation and analysis toolkit for flexible bit-truncation approximate memory."""
from .bitcore import (
    DummyPattern,
    FloatBits,
    Mode,
    TruncationIndexSet,
    TruncationSpec,
    apply_truncation_byte,
    apply_truncation_float,
    apply_truncation_word,
    brute_force_best_fill,
    expected_mse_float,
    expected_mse_uniform,
    optimal_dummy,
)
from .memsim import MemoryArray, run_script
from .powermodel import CalibrationTable, PowerParams, aggregate_savings, read_power_estimate, savings_anchored, savings_linear
from .tensortrunc import TensorBuffer, error_stats, load_tensor, save_tensor, sweep, truncate_tensor

__version__ = "0.1.0"
