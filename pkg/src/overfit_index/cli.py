"""Command-line entry point: compute, compare, watch, synth, and plot.

Exit codes are distinct per failure class: 0 success, 1 usage,
2 invalid data (parse/schema/validation/sequencing), 3 I/O.

Input format is detected from the file extension (.csv -> csv, anything
else -> jsonl) and can be forced with --format.  Accuracies are treated
as fractions unless --percent declares otherwise; --map FIELD=COLUMN
renames source fields.  `-` reads stdin (jsonl unless --format says
csv).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import IO

from .core import (
    Driver,
    OIAccumulator,
    OIResult,
    TrainingRun,
    accumulate,
    compute_oi,
    dominant_driver,
    epoch_penalty,
)
from .errors import OverfitIndexError, SequencingError
from .ingest import (
    AccuracyUnit,
    FieldMapping,
    canonical_record,
    parse_csv,
    parse_jsonl,
    parse_jsonl_record,
    write_jsonl,
)
from .report import compare, plot
from .synth import PRESETS, SynthSpec, generate, preset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

_MAP_FIELDS = ("epoch", "train_loss", "val_loss", "train_acc", "val_acc")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; this tool reserves 2 for bad data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value: float) -> str:
    return format(value, ".10g")


def _map_pair(text: str) -> tuple[str, str]:
    field, sep, column = text.partition("=")
    if not sep or not column or field not in _MAP_FIELDS:
        raise argparse.ArgumentTypeError(
            f"expected FIELD=COLUMN with FIELD one of {', '.join(_MAP_FIELDS)}")
    return field, column


def _window_arg(text: str) -> int | None:
    if text == "all":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected a positive integer or 'all', got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(
            f"window must be >= 1 or 'all', got {value}")
    return value


def _mapping_from_args(args: argparse.Namespace) -> FieldMapping:
    unit = AccuracyUnit.PERCENT if args.percent else AccuracyUnit.FRACTION
    kwargs = {f"{field}_key": column for field, column in (args.map or [])}
    return FieldMapping(accuracy_unit=unit, **kwargs)


def _load_run(path: str, args: argparse.Namespace) -> TrainingRun:
    mapping = _mapping_from_args(args)
    fmt = args.format or ("csv" if path.endswith(".csv") else "jsonl")
    parse = parse_csv if fmt == "csv" else parse_jsonl
    if path == "-":
        return parse(sys.stdin, mapping, label="stdin")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse(fh, mapping, label=Path(path).stem)


def _add_input_flags(sub: argparse.ArgumentParser,
                     format_flag: bool = True) -> None:
    if format_flag:
        sub.add_argument("--format", choices=("csv", "jsonl"), default=None,
                         help="input format (default: by file extension)")
    sub.add_argument("--percent", action="store_true",
                     help="accuracies in the input are percentages")
    sub.add_argument("--map", action="append", type=_map_pair, metavar="FIELD=COLUMN",
                     help="rename a source field (repeatable)")


def _result_payload(run: TrainingRun, result: OIResult,
                    driver: Driver) -> dict:
    return {
        "label": run.label,
        "n_epochs": result.n_epochs,
        "total": result.total,
        "normalized": result.normalized,
        "dominant_driver": driver.value,
        "trace": [
            {
                "epoch": pen.epoch,
                "loss_gap": pen.loss_gap,
                "acc_gap": pen.acc_gap,
                "penalty": pen.penalty,
                "contribution": pen.contribution,
                "dominant": pen.dominant.value,
            }
            for pen in result.trace
        ],
    }


def _print_result(run: TrainingRun, result: OIResult, driver: Driver,
                  trace: bool) -> None:
    print(f"run         {run.label}")
    print(f"epochs      {result.n_epochs}")
    print(f"total_oi    {_fmt(result.total)}")
    print(f"normalized  {_fmt(result.normalized)}")
    print(f"driver      {driver.value}")
    if trace:
        print()
        print(f"{'epoch':>5}  {'loss_gap':<13} {'acc_gap':<13} "
              f"{'penalty':<13} {'contribution':<13} dominant")
        for pen in result.trace:
            print(f"{pen.epoch:>5}  {pen.loss_gap:<13.6g} {pen.acc_gap:<13.6g} "
                  f"{pen.penalty:<13.6g} {pen.contribution:<13.6g} "
                  f"{pen.dominant.value}")


def cmd_compute(args: argparse.Namespace) -> int:
    run = _load_run(args.input, args)
    result = compute_oi(run)
    driver = dominant_driver(result)
    if args.json:
        print(json.dumps(_result_payload(run, result, driver)))
    else:
        _print_result(run, result, driver, args.trace)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    baseline_run = _load_run(args.baseline, args)
    variant_run = _load_run(args.variant, args)
    cmp = compare((baseline_run.label, compute_oi(baseline_run)),
                  (variant_run.label, compute_oi(variant_run)))
    if args.json:
        payload = {
            "baseline_label": cmp.baseline_label,
            "variant_label": cmp.variant_label,
            "baseline_oi": cmp.baseline_oi,
            "variant_oi": cmp.variant_oi,
            "delta": cmp.delta,
            "ratio": cmp.ratio,
            "normalized_delta": cmp.normalized_delta,
            "more_overfit": cmp.more_overfit,
        }
        print(json.dumps(payload))
        return EXIT_OK
    print(f"baseline    {cmp.baseline_label}  oi {_fmt(cmp.baseline_oi)}")
    print(f"variant     {cmp.variant_label}  oi {_fmt(cmp.variant_oi)}")
    print(f"delta       {_fmt(cmp.delta)}")
    if cmp.ratio is None:
        print("ratio       undefined (baseline oi is 0)")
    else:
        print(f"ratio       {_fmt(cmp.ratio)}")
    if cmp.normalized_delta is not None:
        print(f"norm_delta  {_fmt(cmp.normalized_delta)}")
    if cmp.more_overfit is None:
        print("verdict     equal oi")
    else:
        print(f"verdict     {cmp.more_overfit} overfits more")
    return EXIT_OK


def _watch_stream(stream: IO, args: argparse.Namespace) -> int:
    mapping = _mapping_from_args(args)
    acc = OIAccumulator()
    base: int | None = None
    total_is_zero = True
    drivers: set[Driver] = set()
    for lineno, line in enumerate(stream, start=1):
        text = line.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            print(f"error: malformed JSON: {exc.msg} (line {lineno})",
                  file=sys.stderr)
            return EXIT_DATA
        try:
            raw = parse_jsonl_record(obj, lineno, mapping)
            if base is None:
                base = raw.epoch
            expected = base + acc.epochs_seen
            if raw.epoch != expected:
                raise SequencingError(expected, raw.epoch, line=lineno)
            record = canonical_record(raw, acc.epochs_seen + 1, mapping)
            pen = epoch_penalty(record)
            acc = accumulate(acc, record)
        except OverfitIndexError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DATA
        if pen.penalty > 0:
            total_is_zero = False
            drivers.add(pen.dominant)
        if args.json:
            print(json.dumps({
                "event": "epoch",
                "epoch": record.epoch,
                "source_epoch": raw.epoch,
                "penalty": pen.penalty,
                "running_oi": acc.running_total,
            }), flush=True)
        else:
            print(f"epoch {record.epoch:>5}  penalty {_fmt(pen.penalty):<14} "
                  f"running_oi {_fmt(acc.running_total)}", flush=True)

    n = acc.epochs_seen
    normalized = acc.running_total / (n * (n + 1) / 2) if n else 0.0
    if total_is_zero:
        driver = Driver.NONE
    elif drivers == {Driver.LOSS}:
        driver = Driver.LOSS
    elif drivers == {Driver.ACCURACY}:
        driver = Driver.ACCURACY
    else:
        driver = Driver.MIXED
    if args.json:
        print(json.dumps({
            "event": "summary",
            "n_epochs": n,
            "total": acc.running_total,
            "normalized": normalized,
            "dominant_driver": driver.value,
        }), flush=True)
    else:
        print("--")
        print(f"epochs      {n}")
        print(f"total_oi    {_fmt(acc.running_total)}")
        print(f"normalized  {_fmt(normalized)}")
        print(f"driver      {driver.value}")
    return EXIT_OK


def cmd_watch(args: argparse.Namespace) -> int:
    if args.input == "-":
        return _watch_stream(sys.stdin, args)
    with open(args.input, "r", encoding="utf-8") as fh:
        return _watch_stream(fh, args)


_SYNTH_FIELDS = {
    "epochs": "n_epochs",
    "loss_start": "train_loss_start",
    "loss_floor": "train_loss_floor",
    "loss_decay": "loss_decay",
    "onset": "divergence_onset",
    "slope": "divergence_slope",
    "acc_ceiling_train": "acc_ceiling_train",
    "acc_ceiling_val": "acc_ceiling_val",
    "acc_rate": "acc_rate",
    "seed": "seed",
    "noise": "noise_amplitude",
}


def cmd_synth(args: argparse.Namespace) -> int:
    if args.preset:
        spec = preset(args.preset)
        label = args.preset
    else:
        spec = SynthSpec()
        label = "synth"
    overrides = {
        field: getattr(args, flag)
        for flag, field in _SYNTH_FIELDS.items()
        if getattr(args, flag) is not None
    }
    if overrides:
        spec = replace(spec, **overrides)
    run = generate(spec, label=label)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            write_jsonl(run, fh)
    else:
        write_jsonl(run, sys.stdout)
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    run = _load_run(args.input, args)
    doc = plot(run, metric=args.metric, window=args.window,
               fmt=args.chart_format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(doc)
        print(args.output)
    else:
        sys.stdout.write(doc)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oi",
                     description="Epoch-weighted overfitting index over "
                                 "training/validation telemetry.")
    subs = parser.add_subparsers(dest="command", required=True,
                                 parser_class=_Parser)

    p_compute = subs.add_parser("compute", help="score one run")
    p_compute.add_argument("input", help="run file, or - for stdin")
    _add_input_flags(p_compute)
    p_compute.add_argument("--trace", action="store_true",
                           help="print the per-epoch breakdown")
    p_compute.add_argument("--json", action="store_true",
                           help="machine-readable output")
    p_compute.set_defaults(func=cmd_compute)

    p_compare = subs.add_parser("compare", help="compare two runs")
    p_compare.add_argument("baseline", help="baseline run file")
    p_compare.add_argument("variant", help="variant run file")
    _add_input_flags(p_compare)
    p_compare.add_argument("--json", action="store_true",
                           help="machine-readable output")
    p_compare.set_defaults(func=cmd_compare)

    p_watch = subs.add_parser("watch",
                              help="stream JSONL epochs, print running index")
    p_watch.add_argument("input", nargs="?", default="-",
                         help="JSONL stream (default: stdin)")
    _add_input_flags(p_watch, format_flag=False)  # watch input is always JSONL
    p_watch.add_argument("--json", action="store_true",
                         help="machine-readable output")
    p_watch.set_defaults(func=cmd_watch)

    p_synth = subs.add_parser("synth", help="generate a synthetic run")
    p_synth.add_argument("--preset", choices=sorted(PRESETS), default=None,
                         help="named curve preset")
    p_synth.add_argument("--epochs", type=int, default=None)
    p_synth.add_argument("--loss-start", type=float, default=None,
                         dest="loss_start")
    p_synth.add_argument("--loss-floor", type=float, default=None,
                         dest="loss_floor")
    p_synth.add_argument("--loss-decay", type=float, default=None,
                         dest="loss_decay")
    p_synth.add_argument("--onset", type=int, default=None,
                         help="epoch after which validation loss diverges")
    p_synth.add_argument("--slope", type=float, default=None,
                         help="divergence slope per epoch")
    p_synth.add_argument("--acc-ceiling-train", type=float, default=None,
                         dest="acc_ceiling_train")
    p_synth.add_argument("--acc-ceiling-val", type=float, default=None,
                         dest="acc_ceiling_val")
    p_synth.add_argument("--acc-rate", type=float, default=None,
                         dest="acc_rate")
    p_synth.add_argument("--seed", type=int, default=None)
    p_synth.add_argument("--noise", type=float, default=None,
                         help="uniform noise amplitude")
    p_synth.add_argument("-o", "--output", default=None,
                         help="output path (default: stdout)")
    p_synth.set_defaults(func=cmd_synth)

    p_plot = subs.add_parser("plot", help="render train-vs-validation chart")
    p_plot.add_argument("input", help="run file, or - for stdin")
    p_plot.add_argument("--metric", choices=("loss", "accuracy"),
                        default="loss")
    p_plot.add_argument("--window", type=_window_arg, default=10,
                        help="number of trailing epochs, or 'all' (default 10)")
    p_plot.add_argument("--format", choices=("svg", "text"), default="svg",
                        dest="chart_format", help="chart format")
    p_plot.add_argument("--input-format", choices=("csv", "jsonl"),
                        default=None, dest="format",
                        help="input format (default: by file extension)")
    p_plot.add_argument("--percent", action="store_true",
                        help="accuracies in the input are percentages")
    p_plot.add_argument("--map", action="append", type=_map_pair,
                        metavar="FIELD=COLUMN",
                        help="rename a source field (repeatable)")
    p_plot.add_argument("-o", "--output", default=None,
                        help="output path (default: stdout)")
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OverfitIndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
