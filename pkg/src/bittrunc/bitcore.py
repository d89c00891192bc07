"""Bit-truncation semantics for bytes, 32-bit words and IEEE-754 single floats.

Truncated bits are replaced by the optimal dummy pattern: the most significant
truncated bit is forced to 1 and every other truncated bit to 0. An exhaustive
enumeration oracle (:func:`brute_force_best_fill`) checks that this pattern
minimises the expected squared error under uniformly distributed true bits.

Scalar functions operate on Python ints; the ``*_array`` variants are the
vectorised numpy equivalents used by the video and tensor pipelines.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

FRACTION_BITS = 23
EXPONENT_MASK = 0x7F800000
FRACTION_MASK = 0x007FFFFF
WORD_MASK = 0xFFFFFFFF
DEFAULT_ORACLE_CAP = 12

NONFINITE_POLICIES = ("preserve", "hardware")


class Mode(str, enum.Enum):
    BYTE = "byte"
    WORD = "word"

    @property
    def max_bits(self) -> int:
        return 8 if self is Mode.BYTE else 32


@dataclass(frozen=True)
class FloatBits:
    """A 32-bit IEEE-754 single precision pattern."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw <= WORD_MASK:
            raise ValueError(f"raw pattern out of 32-bit range: {self.raw:#x}")

    @classmethod
    def from_fields(cls, sign: int, exponent: int, fraction: int) -> "FloatBits":
        if sign not in (0, 1) or not 0 <= exponent < 256 or not 0 <= fraction <= FRACTION_MASK:
            raise ValueError("field out of range")
        return cls((sign << 31) | (exponent << 23) | fraction)

    @classmethod
    def from_float(cls, value: float) -> "FloatBits":
        return cls(int(np.array(value, dtype=np.float32).view(np.uint32)))

    @property
    def sign(self) -> int:
        return self.raw >> 31

    @property
    def exponent(self) -> int:
        return (self.raw >> 23) & 0xFF

    @property
    def fraction(self) -> int:
        return self.raw & FRACTION_MASK

    @property
    def is_finite(self) -> bool:
        return self.exponent != 0xFF

    def to_float(self) -> float:
        return float(np.array(self.raw, dtype=np.uint32).view(np.float32))

    def scale(self) -> Fraction:
        """Signed power-of-two factor ``(-1)^sign * 2^(exponent - 127)``."""
        mag = Fraction(2) ** (self.exponent - 127)
        return -mag if self.sign else mag

    def decode(self) -> Fraction:
        """Exact value assuming a normalised encoding (implicit leading one)."""
        return self.scale() * (1 + Fraction(self.fraction, 1 << FRACTION_BITS))


@dataclass(frozen=True)
class TruncationIndexSet:
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] > 31):
            raise ValueError(f"bit index out of 0..31: {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def of(cls, indices: Iterable[int]) -> "TruncationIndexSet":
        idx = sorted(int(i) for i in indices)
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices")
        return cls(tuple(idx))

    @classmethod
    def contiguous(cls, n: int) -> "TruncationIndexSet":
        return cls(tuple(range(n)))

    @property
    def t_max(self) -> int | None:
        return self.indices[-1] if self.indices else None

    @property
    def cardinality(self) -> int:
        return len(self.indices)

    @property
    def combinations(self) -> int:
        return 1 << len(self.indices)

    @property
    def mask(self) -> int:
        m = 0
        for i in self.indices:
            m |= 1 << i
        return m

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True)
class TruncationSpec:
    """Run-time truncation knob: ``k`` contiguous LSBs per byte or per word."""

    mode: Mode
    k: int

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not 0 <= self.k <= self.mode.max_bits:
            raise ValueError(f"{self.mode.value} mode allows 0..{self.mode.max_bits} bits, got {self.k}")

    @classmethod
    def byte(cls, k: int) -> "TruncationSpec":
        return cls(Mode.BYTE, k)

    @classmethod
    def word(cls, k: int) -> "TruncationSpec":
        return cls(Mode.WORD, k)

    def index_set(self) -> TruncationIndexSet:
        if self.mode is Mode.WORD:
            return TruncationIndexSet.contiguous(self.k)
        return TruncationIndexSet(tuple(8 * b + i for b in range(4) for i in range(self.k)))


@dataclass(frozen=True)
class DummyPattern:
    force_one_mask: int = 0
    force_zero_mask: int = 0

    def apply(self, value: int) -> int:
        return (value & ~(self.force_one_mask | self.force_zero_mask)) | self.force_one_mask


def optimal_dummy(T: TruncationIndexSet) -> DummyPattern:
    if not T.indices:
        return DummyPattern()
    one = 1 << T.t_max
    return DummyPattern(force_one_mask=one, force_zero_mask=T.mask & ~one)


def spec_dummy(spec: TruncationSpec) -> DummyPattern:
    """Dummy pattern for a run-time spec; byte mode gets one pattern per byte."""
    if spec.mode is Mode.WORD:
        return optimal_dummy(TruncationIndexSet.contiguous(spec.k))
    one = zero = 0
    for b in range(4):
        pat = optimal_dummy(TruncationIndexSet(tuple(8 * b + i for i in range(spec.k))))
        one |= pat.force_one_mask
        zero |= pat.force_zero_mask
    return DummyPattern(one, zero)


def _dummy_masks(k: int) -> tuple[int, int]:
    """(clear mask, set mask) for ``k`` contiguous LSBs."""
    if k == 0:
        return 0, 0
    return (1 << k) - 1, 1 << (k - 1)


def apply_truncation_byte(v: int, k: int) -> int:
    if not 0 <= v <= 0xFF:
        raise ValueError(f"byte value out of range: {v}")
    if not 0 <= k <= 8:
        raise ValueError(f"byte truncation allows 0..8 bits, got {k}")
    clear, one = _dummy_masks(k)
    return (v & ~clear & 0xFF) | one


def apply_truncation_word(w: int, spec: TruncationSpec) -> int:
    if not 0 <= w <= WORD_MASK:
        raise ValueError(f"word value out of range: {w:#x}")
    return spec_dummy(spec).apply(w) & WORD_MASK


def _check_float_indices(T: TruncationIndexSet) -> None:
    if T.indices and T.t_max >= FRACTION_BITS:
        raise ValueError(f"float truncation is limited to fraction bits 0..22, got index {T.t_max}")


def _check_policy(nonfinite: str) -> None:
    if nonfinite not in NONFINITE_POLICIES:
        raise ValueError(f"nonfinite policy must be one of {NONFINITE_POLICIES}, got {nonfinite!r}")


def apply_truncation_float(
    x: FloatBits | float, T: TruncationIndexSet, nonfinite: str = "preserve"
) -> FloatBits:
    """Replace fraction bits ``T`` of ``x`` by the dummy pattern.

    With ``nonfinite="preserve"`` Inf and NaN pass through unchanged; with
    ``"hardware"`` the raw bit rule is applied to them as well (so +Inf with a
    non-empty ``T`` becomes a NaN). Subnormals always get the raw bit rule.
    """
    _check_float_indices(T)
    _check_policy(nonfinite)
    if not isinstance(x, FloatBits):
        x = FloatBits.from_float(x)
    if nonfinite == "preserve" and not x.is_finite:
        return x
    return FloatBits(optimal_dummy(T).apply(x.raw))


# -- vectorised variants -------------------------------------------------------


def truncate_bytes_array(values: np.ndarray, k) -> np.ndarray:
    """Apply the byte rule elementwise; ``k`` is a scalar or an array broadcastable to ``values``."""
    values = np.asarray(values)
    if values.dtype != np.uint8:
        raise TypeError(f"expected uint8 samples, got {values.dtype}")
    k_arr = np.asarray(k)
    if k_arr.ndim == 0:
        k = int(k_arr)
        if not 0 <= k <= 8:
            raise ValueError(f"byte truncation allows 0..8 bits, got {k}")
        clear, one = _dummy_masks(k)
        if k == 0:
            return values.copy()
        return (values & np.uint8(~clear & 0xFF)) | np.uint8(one)
    k_arr = k_arr.astype(np.int16)
    if k_arr.size and (k_arr.min() < 0 or k_arr.max() > 8):
        raise ValueError("byte truncation levels must lie in 0..8")
    clear_lut = np.array([0] + [(1 << j) - 1 for j in range(1, 9)], dtype=np.uint8)
    one_lut = np.array([0] + [1 << (j - 1) for j in range(1, 9)], dtype=np.uint8)
    return (values & ~clear_lut[k_arr]) | one_lut[k_arr]


def truncate_words_array(words: np.ndarray, spec: TruncationSpec) -> np.ndarray:
    words = np.asarray(words, dtype=np.uint32)
    pat = spec_dummy(spec)
    clear = np.uint32(pat.force_one_mask | pat.force_zero_mask)
    return (words & ~clear) | np.uint32(pat.force_one_mask)


def truncate_float32_array(
    values: np.ndarray, T: TruncationIndexSet | int, nonfinite: str = "preserve"
) -> np.ndarray:
    """Float32 fraction truncation; an int ``T`` means that many contiguous LSBs."""
    if isinstance(T, (int, np.integer)):
        if not 0 <= T <= FRACTION_BITS:
            raise ValueError(f"float truncation allows 0..23 bits, got {T}")
        T = TruncationIndexSet.contiguous(int(T))
    _check_float_indices(T)
    _check_policy(nonfinite)
    arr = np.asarray(values, dtype=np.float32)
    bits = arr.view(np.uint32)
    pat = optimal_dummy(T)
    out = (bits & np.uint32(~(pat.force_one_mask | pat.force_zero_mask) & WORD_MASK)) | np.uint32(
        pat.force_one_mask
    )
    if nonfinite == "preserve":
        out = np.where((bits & np.uint32(EXPONENT_MASK)) == np.uint32(EXPONENT_MASK), bits, out)
    return out.astype(np.uint32).view(np.float32).reshape(arr.shape)


# -- exhaustive oracle ----------------------------------------------------------


@dataclass(frozen=True)
class EnsembleStats:
    """All ``m`` values a float can take over its truncated bits, and the SSE of every fill.

    Fills are keyed by their bit pattern restricted to ``T``, which is also
    their magnitude in fraction-LSB units (2^-23). ``sse_lsb`` is exact in
    those units; ``sse`` rescales it to real units.
    """

    indices: TruncationIndexSet
    m: int
    c1: Fraction
    c2: Fraction
    values: tuple[Fraction, ...]
    mean: Fraction
    sse_lsb: Mapping[int, int] = field(repr=False)

    def sse(self, fill: int) -> Fraction:
        return self.c1 * self.c1 * Fraction(self.sse_lsb[fill], 1 << (2 * FRACTION_BITS))

    def mse(self, fill: int) -> Fraction:
        return self.sse(fill) / self.m

    def value_of(self, fill: int) -> Fraction:
        return self.c1 + self.c1 * self.c2 + self.c1 * Fraction(fill, 1 << FRACTION_BITS)


@dataclass(frozen=True)
class OracleResult:
    stats: EnsembleStats
    min_sse_lsb: int
    argmin: frozenset[int]
    dummy_fill: int
    complement_fill: int

    @property
    def dummy_is_optimal(self) -> bool:
        return self.dummy_fill in self.argmin

    @property
    def ties(self) -> tuple[int, ...]:
        return tuple(sorted(self.argmin))


def _subset_patterns(T: TruncationIndexSet) -> np.ndarray:
    j = np.arange(T.combinations, dtype=np.int64)
    out = np.zeros_like(j)
    for pos, bit in enumerate(T.indices):
        out |= ((j >> pos) & 1) << bit
    return out


def brute_force_best_fill(
    T: TruncationIndexSet,
    context: FloatBits | None = None,
    cap: int = DEFAULT_ORACLE_CAP,
) -> OracleResult:
    """Enumerate every true-bit combination against every candidate fill.

    ``context`` supplies the sign, exponent and untruncated fraction bits
    (its bits inside ``T`` are ignored); it defaults to 1.0. All optimality
    decisions use exact integer arithmetic.
    """
    _check_float_indices(T)
    if T.cardinality > cap:
        raise ValueError(f"|T| = {T.cardinality} exceeds the oracle cap of {cap}")
    if context is None:
        context = FloatBits(0x3F800000)

    patterns = _subset_patterns(T)
    m = T.combinations
    # each |diff| < 2^23 so diff^2 * m < 2^(46 + cap); stay inside int64
    if 46 + T.cardinality >= 63:
        raise ValueError("cardinality too large for exact int64 accumulation")
    sse = np.empty(m, dtype=np.int64)
    chunk = max(1, (1 << 22) // m)
    for start in range(0, m, chunk):
        fills = patterns[start:start + chunk]
        diff = patterns[None, :] - fills[:, None]
        sse[start:start + chunk] = (diff * diff).sum(axis=1)

    c1 = context.scale()
    c2 = Fraction(context.fraction & ~T.mask & FRACTION_MASK, 1 << FRACTION_BITS)
    base = c1 + c1 * c2
    values = tuple(base + c1 * Fraction(int(p), 1 << FRACTION_BITS) for p in patterns)
    total = sum(int(p) for p in patterns)
    mean = base + c1 * Fraction(total, m << FRACTION_BITS)

    sse_map = {int(p): int(s) for p, s in zip(patterns, sse)}
    best = min(sse_map.values())
    argmin = frozenset(f for f, s in sse_map.items() if s == best)
    dummy = optimal_dummy(T).force_one_mask
    complement = (T.mask & ~dummy) if T.indices else 0
    stats = EnsembleStats(T, m, c1, c2, values, mean, sse_map)
    return OracleResult(stats, best, argmin, dummy, complement)


def expected_mse_uniform(n: int) -> Fraction:
    """Expected squared error, in LSB^2, of the dummy fill over ``n`` contiguous uniform bits."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(0)
    return Fraction(4 ** n + 2, 12)


def expected_mse_float(T: TruncationIndexSet, context: FloatBits | None = None) -> float:
    """Closed-form expected squared error of the dummy fill in real units.

    Independent bits contribute variance ``w^2/4`` each; the dummy sits
    ``w_max - sum(w)/2`` away from the ensemble mean.
    """
    _check_float_indices(T)
    if not T.indices:
        return 0.0
    c1 = (context or FloatBits(0x3F800000)).scale()
    weights = [Fraction(1, 1 << (FRACTION_BITS - k)) for k in T.indices]
    spread = sum(w * w for w in weights) / 4
    offset = weights[-1] - sum(weights) / 2
    return float(c1 * c1 * (spread + offset * offset))
