"""Command-line entry point.

Exit codes: 0 success, 2 usage or input-format error, 3 verification failure
(optimality violation, or an X read under ``sim --strict``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import random
import sys
from pathlib import Path

from . import bitcore, memsim, powermodel, tensortrunc
from .bitcore import Mode, TruncationIndexSet, TruncationSpec
from .videopipe import frames as vframes
from .videopipe import policies, report as vreport

log = logging.getLogger("bittrunc")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 2, 3
DEFAULT_SEED = 7


class UsageError(Exception):
    pass


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--report", choices=("json", "csv"), default=d("json"), help="report format")
    parser.add_argument("--model", choices=powermodel.MODELS, default=d("anchored"), help="power savings model")
    parser.add_argument("--calibration", type=Path, default=d(None), help="calibration anchors (TOML)")
    parser.add_argument("--seed", type=int, default=d(DEFAULT_SEED))
    parser.add_argument("--threads", type=int, default=d(1))
    parser.add_argument("-v", "--verbose", action="count", default=d(0))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bittrunc", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-prop1", parents=[common], help="exhaustively check the dummy-fill rule")
    p.add_argument("--max-cardinality", type=int, default=6, help="largest random index set (<= oracle cap)")
    p.add_argument("--samples", type=int, default=200, help="number of random index sets")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")

    p = sub.add_parser("sim", parents=[common], help="run a memory script and emit a timing trace")
    p.add_argument("script", nargs="?", type=Path, help=".tmscript file")
    p.add_argument("--fig4", action="store_true", help="run the bundled timing scenario")
    p.add_argument("--trace-out", type=Path, help="write PREFIX.csv and PREFIX.txt")
    p.add_argument("--strict", action="store_true", help="exit 3 if any read returns X")
    p.add_argument("--words", type=int, default=1024, help="array depth")

    p = sub.add_parser("power", parents=[common], help="savings and read power per truncation level")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="word")
    p.add_argument("--k", type=int, help="single level (default: every level of the mode)")
    p.add_argument("--pattern", help="four stored byte values, LSB first, e.g. 00,FF,00,FF")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("video", parents=[common], help="apply a viewer-aware policy to a raw I420 clip")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--output", type=Path, help="truncated clip")
    p.add_argument("--policy", choices=("luminance", "content", "roi", "uniform"), required=True)
    p.add_argument("--condition", choices=sorted(policies.LUMINANCE_LEVELS), default="overcast")
    p.add_argument("--roi", type=Path, help="ROI sidecar: 'frame x y w h' per line")
    p.add_argument("--k", type=int, default=3, help="level for --policy uniform")
    p.add_argument("--variance-threshold", type=float, default=100.0)
    p.add_argument("--content-map", help="plain%%:k breakpoints, e.g. 0:0,20:1,40:2,60:3,80:4")
    p.add_argument("--per-frame", action="store_true", help="content policy decides per frame")
    p.add_argument("--y-only", action="store_true", help="truncate the luma plane only")
    p.add_argument("--metric-planes", choices=("y", "all"), default="y")
    p.add_argument("--report-out", type=Path)

    p = sub.add_parser("tensor", parents=[common], help="truncate float32 tensors or sweep levels")
    tsub = p.add_subparsers(dest="action", required=True)
    for name in ("truncate", "sweep"):
        q = tsub.add_parser(name, parents=[common])
        q.add_argument("--input", type=Path, required=True)
        q.add_argument("--shape", help="comma-separated dims for raw input")
        q.add_argument("--format", dest="in_format", choices=("auto", "trnt", "raw"), default="auto")
        q.add_argument("--nonfinite", choices=bitcore.NONFINITE_POLICIES, default="preserve")
        if name == "truncate":
            q.add_argument("--n", type=int, required=True)
            q.add_argument("--output", type=Path, required=True)
            q.add_argument("--out-format", choices=("trnt", "raw"), default="trnt")
            q.add_argument("--stats-out", type=Path)
        else:
            q.add_argument("--n", default="0..23", help="levels: '17', '0..23' or '1,8,16'")
            q.add_argument("--out", type=Path)
    return parser


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _table(args) -> powermodel.CalibrationTable:
    if args.calibration is None:
        return powermodel.CalibrationTable.default()
    return powermodel.CalibrationTable.load(args.calibration)


# -- subcommands --------------------------------------------------------------


def cmd_verify_prop1(args) -> int:
    if not 1 <= args.max_cardinality <= bitcore.DEFAULT_ORACLE_CAP:
        raise UsageError(f"--max-cardinality must lie in 1..{bitcore.DEFAULT_ORACLE_CAP}")
    if args.samples < 0:
        raise UsageError("--samples must be non-negative")
    rng = random.Random(args.seed)
    sets = [TruncationIndexSet.contiguous(n) for n in range(1, 9)]
    for _ in range(args.samples):
        size = rng.randint(1, args.max_cardinality)
        sets.append(TruncationIndexSet.of(rng.sample(range(bitcore.FRACTION_BITS), size)))

    rows, violations = [], 0
    for i, T in enumerate(sets):
        res = bitcore.brute_force_best_fill(T)
        sse = res.stats.sse_lsb
        ok = res.dummy_is_optimal and sse[res.dummy_fill] == sse[res.complement_fill]
        violations += not ok
        rows.append({
            "case": i,
            "kind": "contiguous" if i < 8 else "random",
            "indices": " ".join(map(str, T.indices)),
            "min_sse_lsb2": res.min_sse_lsb,
            "dummy_fill": res.dummy_fill,
            "dummy_sse_lsb2": sse[res.dummy_fill],
            "complement_sse_lsb2": sse[res.complement_fill],
            "ties": " ".join(map(str, res.ties)),
            "ok": ok,
        })
    log.info("%d cases, %d violations", len(rows), violations)
    if args.report == "csv":
        text = _rows_to_csv(rows)
    else:
        text = json.dumps({"cases": rows, "violations": violations, "seed": args.seed}, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK if violations == 0 else EXIT_VERIFY


def cmd_sim(args) -> int:
    if args.fig4 == (args.script is not None):
        raise UsageError("give exactly one of SCRIPT or --fig4")
    text = memsim.fig4_script() if args.fig4 else memsim.load_script(args.script)
    mem = memsim.MemoryArray(args.words)
    try:
        trace = memsim.run_script(text, mem)
    except memsim.ScriptError as exc:
        raise UsageError(str(exc)) from exc
    rendered = trace.render_text()
    if args.trace_out:
        Path(f"{args.trace_out}.csv").write_text(trace.to_csv(), encoding="utf-8")
        Path(f"{args.trace_out}.txt").write_text(rendered, encoding="utf-8")
    sys.stdout.write(trace.to_csv() if args.report == "csv" else rendered)
    if args.strict and any("X" in r for r in trace.reads()):
        log.error("read returned unknown bits")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_power(args) -> int:
    mode = Mode(args.mode)
    pattern = None
    if args.pattern:
        try:
            pattern = [int(b, 16) for b in args.pattern.split(",")]
        except ValueError:
            raise UsageError(f"bad --pattern {args.pattern!r}") from None
        if len(pattern) != 4 or any(not 0 <= b <= 0xFF for b in pattern):
            raise UsageError("--pattern needs four byte values")
    table = _table(args)
    params = powermodel.PowerParams()
    levels = [args.k] if args.k is not None else range(mode.max_bits + 1)
    rows = []
    for k in levels:
        spec = TruncationSpec(mode, k)
        rows.append({
            "mode": mode.value,
            "k": k,
            "savings_linear_pct": powermodel.savings_linear(spec, params),
            "savings_anchored_pct": powermodel.savings_anchored(spec, table),
            "savings_pct": powermodel.savings(spec, args.model, table, params),
            "read_power_uW": powermodel.read_power_estimate(spec, pattern, params),
            "write_power_mW": powermodel.write_power_mW(params),
        })
    text = _rows_to_csv(rows) if args.report == "csv" else json.dumps(rows, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _parse_content_map(text: str) -> list[tuple[float, int]]:
    try:
        return [(float(p), int(k)) for p, k in (item.split(":") for item in text.split(","))]
    except ValueError:
        raise UsageError(f"bad --content-map {text!r}") from None


def cmd_video(args) -> int:
    clip = vframes.load_yuv(args.input, args.width, args.height)
    if args.policy == "luminance":
        decision = policies.decide_luminance(clip, args.condition)
    elif args.policy == "content":
        mapping = _parse_content_map(args.content_map) if args.content_map else policies.DEFAULT_CONTENT_MAPPING
        decision = policies.decide_content(clip, mapping, args.variance_threshold, args.per_frame)
    elif args.policy == "roi":
        roi = policies.RoiSpec.load(args.roi) if args.roi else policies.RoiSpec()
        decision = policies.decide_roi(clip, roi)
    else:
        decision = policies.decide_uniform(clip, args.k)
    planes = ("y",) if args.y_only else vframes.PLANES
    out = policies.apply_policy(clip, decision, planes, threads=args.threads)
    if args.output:
        vframes.save_yuv(out, args.output)
    rep = vreport.quality_report(clip, out, decision, planes, args.metric_planes, args.model, _table(args),
                                 threads=args.threads)
    _emit(rep.to_csv() if args.report == "csv" else rep.to_json() + "\n", args.report_out)
    return EXIT_OK


def _shape(text: str | None):
    if text is None:
        return None
    try:
        return tuple(int(d) for d in text.split(","))
    except ValueError:
        raise UsageError(f"bad --shape {text!r}") from None


def cmd_tensor(args) -> int:
    t = tensortrunc.load_tensor(args.input, _shape(args.shape), args.in_format)
    table = _table(args)
    if args.action == "truncate":
        out = tensortrunc.truncate_tensor(t, args.n, args.nonfinite)
        tensortrunc.save_tensor(out, args.output, args.out_format)
        if args.stats_out:
            r = tensortrunc.error_stats(t, out, args.n, args.model, table, nonfinite=args.nonfinite)
            text = tensortrunc.sweep_to_csv([r]) if args.report == "csv" else tensortrunc.sweep_to_json([r]) + "\n"
            _emit(text, args.stats_out)
        return EXIT_OK
    levels = tensortrunc.parse_n_range(args.n)
    reports = tensortrunc.sweep(t, levels, args.model, table, nonfinite=args.nonfinite)
    text = tensortrunc.sweep_to_csv(reports) if args.report == "csv" else tensortrunc.sweep_to_json(reports) + "\n"
    _emit(text, args.out)
    return EXIT_OK


COMMANDS = {
    "verify-prop1": cmd_verify_prop1,
    "sim": cmd_sim,
    "power": cmd_power,
    "video": cmd_video,
    "tensor": cmd_tensor,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s: %(message)s")
    if args.threads < 1:
        parser.print_usage(sys.stderr)
        print("bittrunc: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"bittrunc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
