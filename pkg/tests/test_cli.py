import csv
import io
import json
import struct

import numpy as np
import pytest

from bittrunc.cli import main
from bittrunc.tensortrunc import TensorBuffer, load_tensor, save_tensor


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestVerify:
    def test_defaults(self, capsys):
        code, out, _ = run(capsys, "verify-prop1")
        rep = json.loads(out)
        assert code == 0 and rep["violations"] == 0
        assert len(rep["cases"]) == 208
        assert all(c["ties"] for c in rep["cases"])

    def test_cap(self, capsys):
        code, _, err = run(capsys, "verify-prop1", "--max-cardinality", "20")
        assert code == 2 and "max-cardinality" in err

    def test_contiguous_only_csv(self, capsys):
        code, out, _ = run(capsys, "--report", "csv", "verify-prop1", "--samples", "0")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 8
        assert rows[2]["ties"] == "3 4" and rows[2]["min_sse_lsb2"] == "44"

    def test_seeded_determinism(self, capsys):
        a = run(capsys, "verify-prop1", "--seed", "3", "--samples", "20")[1]
        b = run(capsys, "verify-prop1", "--samples", "20", "--seed", "3")[1]
        assert a == b


class TestSim:
    def test_fig4(self, capsys, tmp_path):
        prefix = tmp_path / "trace"
        code, out, _ = run(capsys, "sim", "--fig4", "--trace-out", str(prefix))
        assert code == 0
        for hexval in ("55555555", "56565656", "54545454", "58585858"):
            assert hexval in out
        rows = list(csv.DictReader(io.StringIO((tmp_path / "trace.csv").read_text())))
        reads = [int(r["data_out"], 2) for r in rows if r["data_out"]]
        assert reads[:4] == [0x55555555, 0x56565656, 0x54545454, 0x58585858]
        assert (tmp_path / "trace.txt").read_text() == out

    def test_empty_script(self, capsys, tmp_path):
        path = tmp_path / "empty.tmscript"
        path.write_text("")
        code, out, _ = run(capsys, "--report", "csv", "sim", str(path))
        assert code == 0 and out.strip() == "cycle,command,trunc_mode,k,data_out"

    def test_bad_opcode(self, capsys, tmp_path):
        path = tmp_path / "bad.tmscript"
        path.write_text("NOP\nNOP\nNOP\nNOP\nFLIP 3\n")
        code, _, err = run(capsys, "sim", str(path))
        assert code == 2 and "line 5" in err

    def test_strict_x(self, capsys, tmp_path):
        path = tmp_path / "x.tmscript"
        path.write_text("WRITE 0 FFFFFFFF\nTRUNC BYTE 4\nTRUNC BYTE 2\nREAD 0\n")
        assert run(capsys, "sim", str(path))[0] == 0
        assert run(capsys, "sim", "--strict", str(path))[0] == 3

    def test_needs_one_source(self, capsys):
        assert run(capsys, "sim")[0] == 2


class TestPower:
    def test_single(self, capsys):
        code, out, _ = run(capsys, "power", "--mode", "word", "--k", "17")
        (row,) = json.loads(out)
        assert code == 0 and row["savings_pct"] == pytest.approx(51.69)

    def test_linear_table_csv(self, capsys):
        code, out, _ = run(capsys, "--report", "csv", "--model", "linear", "power", "--mode", "byte")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 9 and float(rows[4]["savings_pct"]) == pytest.approx(47.6)

    def test_pattern(self, capsys):
        code, out, _ = run(capsys, "power", "--k", "8", "--pattern", "00,11,22,33")
        assert json.loads(out)[0]["read_power_uW"] == pytest.approx(296 / 0.119 - 720)

    def test_calibration_file(self, capsys, tmp_path):
        cal = tmp_path / "cal.toml"
        cal.write_text("[word]\nanchors = [[0, 0.0], [10, 40.0]]\n")
        code, out, _ = run(capsys, "power", "--calibration", str(cal), "--k", "5")
        assert json.loads(out)[0]["savings_anchored_pct"] == pytest.approx(20.0)

    def test_bad_k(self, capsys):
        assert run(capsys, "power", "--mode", "byte", "--k", "9")[0] == 2


@pytest.fixture
def yuv_file(tmp_path):
    rng = np.random.default_rng(3)
    path = tmp_path / "in.yuv"
    path.write_bytes(rng.integers(0, 256, 2 * 32 * 32 * 3 // 2, dtype=np.uint8).tobytes())
    return path


class TestVideo:
    def test_sunlight(self, capsys, yuv_file, tmp_path):
        out_path = tmp_path / "out.yuv"
        code, out, _ = run(capsys, "video", "--input", str(yuv_file), "--width", "32", "--height", "32",
                           "--policy", "luminance", "--condition", "sunlight", "--output", str(out_path))
        rep = json.loads(out)
        assert code == 0 and rep["savings_pct"] == pytest.approx(47.02) and rep["params"]["k"] == 4
        data = np.frombuffer(out_path.read_bytes(), np.uint8)
        assert np.all(data & 0xF == 0x8)

    def test_roi_empty(self, capsys, yuv_file, tmp_path):
        roi = tmp_path / "empty.txt"
        roi.write_text("# nothing\n")
        out_path = tmp_path / "out.yuv"
        code, out, _ = run(capsys, "video", "--input", str(yuv_file), "--width", "32", "--height", "32",
                           "--policy", "roi", "--roi", str(roi), "--output", str(out_path))
        assert code == 0 and json.loads(out)["savings_pct"] == pytest.approx(34.93)
        assert np.all(np.frombuffer(out_path.read_bytes(), np.uint8) & 0x7 == 0x4)

    def test_content_gray(self, capsys, tmp_path):
        path = tmp_path / "gray.yuv"
        path.write_bytes(bytes([128]) * (32 * 32 * 3 // 2))
        report = tmp_path / "rep.csv"
        code, _, _ = run(capsys, "--report", "csv", "video", "--input", str(path), "--width", "32", "--height", "32",
                         "--policy", "content", "--report-out", str(report))
        rows = list(csv.DictReader(io.StringIO(report.read_text())))
        assert code == 0 and float(rows[-1]["savings_pct"]) == pytest.approx(47.02)

    def test_size_error(self, capsys, tmp_path):
        path = tmp_path / "bad.yuv"
        path.write_bytes(bytes(100))
        code, _, err = run(capsys, "video", "--input", str(path), "--width", "32", "--height", "32",
                           "--policy", "uniform")
        assert code == 2 and "whole number" in err

    def test_json_csv_agree(self, capsys, yuv_file, tmp_path):
        args = ["video", "--input", str(yuv_file), "--width", "32", "--height", "32", "--policy", "uniform", "--k", "2"]
        js = json.loads(run(capsys, *args)[1])
        rows = list(csv.DictReader(io.StringIO(run(capsys, "--report", "csv", *args)[1])))
        assert [float(r["psnr_db"]) for r in rows[:-1]] == [f["psnr_db"] for f in js["frames"]]
        assert float(rows[-1]["ssim"]) == js["mean_ssim"]


class TestTensor:
    def test_truncate_identity(self, capsys, tmp_path):
        src, dst = tmp_path / "w.trnt", tmp_path / "o.trnt"
        save_tensor(TensorBuffer(np.random.default_rng(0).standard_normal((4, 4))), src)
        code, _, _ = run(capsys, "tensor", "truncate", "--input", str(src), "--output", str(dst), "--n", "0")
        assert code == 0 and dst.read_bytes() == src.read_bytes()

    def test_truncate_raw(self, capsys, tmp_path):
        src, dst = tmp_path / "w.f32", tmp_path / "o.f32"
        src.write_bytes(struct.pack("<2f", 1.0, 2.0))
        code, _, _ = run(capsys, "tensor", "truncate", "--input", str(src), "--shape", "2", "--format", "raw",
                         "--output", str(dst), "--out-format", "raw", "--n", "23")
        assert code == 0 and struct.unpack("<2f", dst.read_bytes()) == (1.5, 3.0)

    def test_sweep(self, capsys, tmp_path):
        src = tmp_path / "w.trnt"
        save_tensor(TensorBuffer(np.random.default_rng(0).standard_normal(1000)), src)
        code, out, _ = run(capsys, "--report", "csv", "tensor", "sweep", "--input", str(src), "--n", "0..23",
                           "--model", "anchored")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert code == 0 and len(rows) == 24
        assert float(rows[17]["savings_pct"]) == pytest.approx(51.69)

    def test_n_out_of_range(self, capsys, tmp_path):
        src = tmp_path / "w.trnt"
        save_tensor(TensorBuffer(np.ones(3)), src)
        code, _, _ = run(capsys, "tensor", "truncate", "--input", str(src), "--output", str(tmp_path / "o"),
                         "--n", "24")
        assert code == 2

    def test_bad_magic(self, capsys, tmp_path):
        src = tmp_path / "bad.trnt"
        src.write_bytes(b"XXXX" + bytes(8))
        code, _, err = run(capsys, "tensor", "sweep", "--input", str(src))
        assert code == 2 and "magic" in err

    def test_stats_out(self, capsys, tmp_path):
        src = tmp_path / "w.trnt"
        save_tensor(TensorBuffer(np.array([1.0])), src)
        stats = tmp_path / "s.json"
        run(capsys, "tensor", "truncate", "--input", str(src), "--output", str(tmp_path / "o.trnt"), "--n", "23",
            "--stats-out", str(stats))
        assert json.loads(stats.read_text())[0]["max_abs_err"] == 0.5
        assert load_tensor(tmp_path / "o.trnt").data.tolist() == [1.5]


def test_usage_error_exit_code(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
