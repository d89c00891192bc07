"""Acceptance criteria, one test each. Run with ``pytest tests/test_acceptance.py -s -v``.

Every test prints a single PASS/FAIL line carrying the measured figures.
"""
import csv
import io
import random
import time

import numpy as np
import pytest

from bittrunc.bitcore import (
    FRACTION_BITS,
    Mode,
    TruncationIndexSet,
    TruncationSpec,
    apply_truncation_word,
    brute_force_best_fill,
    truncate_words_array,
)
from bittrunc.memsim import MemoryArray, fig4_script, run_script, symbols_to_int
from bittrunc.powermodel import savings_anchored, savings_linear
from bittrunc.tensortrunc import TensorBuffer, relative_error_bound, sweep, sweep_to_csv, truncate_tensor
from bittrunc.videopipe import (
    FramePlanar420,
    Rect,
    RoiSpec,
    VideoClip,
    apply_policy,
    decide_content,
    decide_roi,
    decide_uniform,
    mse,
    psnr,
)

SEED = 20240611


@pytest.fixture
def report(capsys):
    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}")
        assert ok, detail
    return emit


def oracle_cases():
    sets = [TruncationIndexSet.contiguous(n) for n in range(1, 9)]
    rng = random.Random(SEED)
    for _ in range(200):
        sets.append(TruncationIndexSet.of(rng.sample(range(FRACTION_BITS), rng.randint(1, 6))))
    return sets


def test_c1_dummy_fill_is_global_minimum(report):
    t0 = time.perf_counter()
    cases = oracle_cases()
    bad = [T.indices for T in cases if not brute_force_best_fill(T).dummy_is_optimal]
    dt = time.perf_counter() - t0
    report(1, not bad and dt < 60, f"{len(cases)} index sets, {len(bad)} violations, {dt:.2f}s (limit 60s)")


def test_c2_complement_ties(report):
    mismatched = 0
    for T in oracle_cases():
        r = brute_force_best_fill(T)
        sse = r.stats.sse_lsb
        if sse[r.dummy_fill] != sse[r.complement_fill] or r.stats.sse(r.dummy_fill) != r.stats.sse(r.complement_fill):
            mismatched += 1
    report(2, mismatched == 0, f"dummy/complement SSE mismatches: {mismatched}")


def test_c3_trace_reads(report):
    expected = [0x55555555, 0x56565656, 0x54545454, 0x58585858,
                0x55555555, 0x55555556, 0x55555554, 0x55558000]
    t0 = time.perf_counter()
    reads = [symbols_to_int(r) for r in run_script(fig4_script()).reads()]
    dt = time.perf_counter() - t0
    report(3, reads == expected and dt < 1, f"reads {[f'{r:08X}' for r in reads]}, {dt * 1e3:.1f}ms (limit 1s)")


def test_c4_retention(report):
    mem = MemoryArray(4)
    mem.write_word(0, 0x55555555)
    mem.set_truncation(TruncationSpec.byte(4))
    mem.set_truncation(TruncationSpec.byte(2))
    stale = mem.read_word(0)
    # re-powered columns are bits 2 and 3 of each byte
    xs = {31 - c for c in range(32) if stale[31 - c] == "X"}
    repowered = {31 - (8 * b + i) for b in range(4) for i in (2, 3)}
    mem.write_word(0, 0x55555555)
    fresh = mem.read_word(0)
    ok = xs == repowered and "X" not in fresh and symbols_to_int(fresh) == 0x56565656
    report(4, ok, f"before rewrite {stale}, after rewrite {fresh}")


def test_c5_analytic_psnr(report):
    t0 = time.perf_counter()
    y = np.random.default_rng(SEED).integers(0, 256, (256, 256), dtype=np.uint8)
    clip = VideoClip(256, 256, [FramePlanar420.from_luma(y)])
    results = {}
    for k, target_psnr, target_mse in ((3, 40.73, 5.5), (4, 34.81, 21.5)):
        out = apply_policy(clip, decide_uniform(clip, k), planes=("y",))
        results[k] = (psnr(clip[0], out[0]), mse(y, out[0].y), target_psnr, target_mse)
    dt = time.perf_counter() - t0
    ok = dt < 5 and all(abs(p - tp) <= 0.10 and abs(m / tm - 1) <= 0.01 for p, m, tp, tm in results.values())
    detail = ", ".join(f"k={k}: PSNR {p:.3f} dB (target {tp}), MSE {m:.3f} (target {tm})"
                       for k, (p, m, tp, tm) in results.items())
    report(5, ok, f"{detail}, {dt:.2f}s (limit 5s)")


def test_c6_power_anchors(report):
    t0 = time.perf_counter()
    anchors = [(TruncationSpec.byte(3), 34.93, 1.0), (TruncationSpec.byte(4), 47.02, 1.0),
               (TruncationSpec.word(17), 51.69, 3.0), (TruncationSpec.word(21), 66.08, 6.0)]
    lines, ok = [], True
    for spec, target, limit in anchors:
        a, lin = savings_anchored(spec), savings_linear(spec)
        ok &= abs(a - target) <= 1e-9 and abs(lin - a) <= limit
        lines.append(f"{spec.mode.value} {spec.k}: anchored {a:.2f} linear {lin:.2f} (gap limit {limit})")
    dt = time.perf_counter() - t0
    report(6, ok and dt < 1, "; ".join(lines))


def test_c7_tensor_bound(report):
    t0 = time.perf_counter()
    t = TensorBuffer(np.random.default_rng(SEED).standard_normal(1_000_000))
    a = t.data.astype(np.float64)
    worst = {}
    violations = 0
    for n in (1, 8, 16, 17, 20, 23):
        b = truncate_tensor(t, n).data.astype(np.float64)
        rel = np.abs(a - b) / np.abs(a)
        worst[n] = rel.max()
        violations += int((rel > relative_error_bound(n)).sum())
    dt = time.perf_counter() - t0
    ok = violations == 0 and relative_error_bound(17) == 2.0 ** -7 and dt < 30
    detail = ", ".join(f"n={n}: {w / relative_error_bound(n):.4f} of bound" for n, w in worst.items())
    report(7, ok, f"{violations} violations; {detail}; {dt:.2f}s (limit 30s)")


def test_c8_memsim_matches_bitcore(report):
    t0 = time.perf_counter()
    words = np.random.default_rng(SEED).integers(0, 1 << 32, 10_000, dtype=np.uint64).astype(np.uint32)
    mismatches = checked = 0
    for mode in Mode:
        for k in range(mode.max_bits + 1):
            spec = TruncationSpec(mode, k)
            mem = MemoryArray(len(words))
            mem.write_words(np.arange(len(words)), words)
            mem.set_truncation(spec)
            got = np.array([int(s, 2) for s in mem.read_words(np.arange(len(words)))], dtype=np.uint64)
            want = truncate_words_array(words, spec).astype(np.uint64)
            mismatches += int((got != want).sum())
            checked += len(words)
            # scalar path on a few words keeps the vector helper honest
            for w in words[:5]:
                mismatches += apply_truncation_word(int(w), spec) != int(truncate_words_array(np.array([w]), spec)[0])
    dt = time.perf_counter() - t0
    report(8, mismatches == 0 and dt < 30, f"{checked} reads, {mismatches} mismatches, {dt:.2f}s (limit 30s)")


def _noise_clip(seed, w=64, h=48, frames=3):
    rng = np.random.default_rng(seed)
    return VideoClip(w, h, [FramePlanar420(rng.integers(0, 256, (h, w), dtype=np.uint8),
                                           rng.integers(0, 256, (h // 2, w // 2), dtype=np.uint8),
                                           rng.integers(0, 256, (h // 2, w // 2), dtype=np.uint8))
                            for _ in range(frames)])


def test_c9_substitute_properties(report):
    clip = _noise_clip(SEED)
    checks = {}

    roi = RoiSpec({0: (Rect(8, 8, 24, 16),), 2: (Rect(30, 10, 20, 30),)})
    out = apply_policy(clip, decide_roi(clip, roi))
    contained = True
    for i, (src, dst) in enumerate(zip(clip, out)):
        inside = np.zeros(src.y.shape, bool)
        for r in roi.for_frame(i):
            inside[r.y:r.y + r.h, r.x:r.x + r.w] = True
        contained &= np.array_equal(src.y[inside], dst.y[inside])
        contained &= bool(np.all(dst.y[~inside] & 0x7 == 0x4))
    checks["roi containment"] = contained

    a = apply_policy(clip, decide_content(clip), threads=1)
    b = apply_policy(_noise_clip(SEED), decide_content(_noise_clip(SEED)), threads=4)
    checks["policy determinism"] = all(x == y for x, y in zip(a, b))

    curve = [psnr(clip[0], apply_policy(clip, decide_uniform(clip, k))[0]) for k in range(9)]
    checks["psnr monotone in k"] = all(q <= p for p, q in zip(curve, curve[1:]))

    rows = list(csv.DictReader(io.StringIO(sweep_to_csv(sweep(TensorBuffer(np.ones(8)), range(24))))))
    col = {int(r["n"]): float(r["savings_pct"]) for r in rows}
    checks["sweep csv anchors"] = abs(col[17] - 51.69) <= 1e-9 and abs(col[21] - 66.08) <= 1e-9 and col[0] == 0.0

    report(9, all(checks.values()), ", ".join(f"{k}={'ok' if v else 'FAILED'}" for k, v in checks.items()))
