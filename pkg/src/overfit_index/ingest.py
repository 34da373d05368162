"""Parse and canonicalize per-epoch telemetry from CSV and JSONL sources.

Both parsers share one contract: records are sorted by their source
epoch label, re-indexed to the canonical ordinals 1..N, and validated.
Original epoch labels are preserved in run metadata whenever they differ
from the canonical ones, so sparse or 0-based logs stay traceable.
Accuracy units are never guessed: a FieldMapping (or the CLI --percent
flag) declares whether accuracies arrive as fractions or percentages.

Errors carry 1-based line numbers (JSONL) or physical row numbers (CSV,
header = row 1).  Encoding is UTF-8; the CSV dialect is comma-separated
with standard quoting.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

from .core import EpochRecord, TrainingRun, check_record
from .errors import (
    DuplicateEpochError,
    ParseError,
    SchemaError,
    ValidationError,
)

__all__ = [
    "AccuracyUnit",
    "FieldMapping",
    "RawRecord",
    "Diagnostic",
    "DEFAULT_MAPPING",
    "parse_jsonl",
    "parse_csv",
    "parse_jsonl_record",
    "canonical_record",
    "validate_run",
    "write_jsonl",
    "write_csv",
]


class AccuracyUnit(enum.Enum):
    FRACTION = "fraction"
    PERCENT = "percent"


@dataclass(frozen=True)
class FieldMapping:
    """Source column/field names for the five required inputs."""

    epoch_key: str = "epoch"
    train_loss_key: str = "train_loss"
    val_loss_key: str = "val_loss"
    train_acc_key: str = "train_acc"
    val_acc_key: str = "val_acc"
    accuracy_unit: AccuracyUnit = AccuracyUnit.FRACTION

    def keys(self) -> tuple[str, str, str, str, str]:
        return (self.epoch_key, self.train_loss_key, self.val_loss_key,
                self.train_acc_key, self.val_acc_key)

    def check(self) -> None:
        names = self.keys()
        if any(not k for k in names):
            raise ValidationError("field mapping keys must be nonempty",
                                  field="mapping")
        if len(set(names)) != len(names):
            raise ValidationError(
                f"field mapping keys must be distinct, got {names}",
                field="mapping")


DEFAULT_MAPPING = FieldMapping()

# canonical field name -> FieldMapping attribute holding the source key
_SOURCE_KEYS = {
    "train_loss": "train_loss_key",
    "val_loss": "val_loss_key",
    "train_acc": "train_acc_key",
    "val_acc": "val_acc_key",
}


@dataclass(frozen=True)
class RawRecord:
    """One source record before re-indexing: source epoch label, the four
    metrics keyed by canonical name, and the 1-based source line/row."""

    epoch: int
    metrics: dict[str, float]
    source_line: int


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation found by validate_run."""

    severity: str
    category: str
    message: str
    epoch: int | None = None
    field: str | None = None


def _text_lines(stream: Iterable[str] | Iterable[bytes] | IO) -> Iterator[str]:
    """Yield text lines from a text or byte stream."""
    for line in stream:
        if isinstance(line, bytes):
            yield line.decode("utf-8")
        else:
            yield line


def _coerce_epoch(value: object, line: int, key: str) -> int:
    if isinstance(value, bool):
        raise ParseError(f"{key} must be an integer, got {value!r}", line=line)
    if isinstance(value, int):
        epoch = value
    elif isinstance(value, float) and value.is_integer():
        epoch = int(value)
    else:
        raise ParseError(f"{key} must be an integer, got {value!r}", line=line)
    if epoch < 0:
        raise ValidationError(f"{key} must be >= 0, got {epoch}",
                              field="epoch", line=line)
    return epoch


def _coerce_metric(value: object, line: int, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{key} must be a number, got {value!r}", line=line)
    return float(value)


def parse_jsonl_record(obj: object, line: int,
                       mapping: FieldMapping = DEFAULT_MAPPING) -> RawRecord:
    """Extract one RawRecord from a decoded JSONL object.

    Shared with the CLI watch loop, which consumes lines one at a time.
    """
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}",
                         line=line)
    if mapping.epoch_key not in obj:
        raise SchemaError(f"missing required field {mapping.epoch_key!r}",
                          key=mapping.epoch_key, line=line)
    epoch = _coerce_epoch(obj[mapping.epoch_key], line, mapping.epoch_key)
    metrics = {}
    for canonical, attr in _SOURCE_KEYS.items():
        key = getattr(mapping, attr)
        if key not in obj:
            raise SchemaError(f"missing required field {key!r}",
                              key=key, line=line)
        metrics[canonical] = _coerce_metric(obj[key], line, key)
    return RawRecord(epoch=epoch, metrics=metrics, source_line=line)


def canonical_record(raw: RawRecord, canonical_epoch: int,
                     mapping: FieldMapping = DEFAULT_MAPPING) -> EpochRecord:
    """Build a validated EpochRecord at the given canonical ordinal,
    applying the declared accuracy-unit conversion."""
    metrics = dict(raw.metrics)
    if mapping.accuracy_unit is AccuracyUnit.PERCENT:
        metrics["train_acc"] = metrics["train_acc"] / 100.0
        metrics["val_acc"] = metrics["val_acc"] / 100.0
    record = EpochRecord(
        epoch=canonical_epoch,
        train_loss=metrics["train_loss"],
        val_loss=metrics["val_loss"],
        train_acc=metrics["train_acc"],
        val_acc=metrics["val_acc"],
    )
    try:
        check_record(record)
    except ValidationError as exc:
        raise ValidationError(str(exc), field=exc.field,
                              line=raw.source_line) from None
    return record


def _build_run(raws: list[RawRecord], mapping: FieldMapping,
               label: str) -> TrainingRun:
    if not raws:
        raise ParseError("input contains no records")
    ordered = sorted(raws, key=lambda r: r.epoch)
    seen: set[int] = set()
    for raw in ordered:
        if raw.epoch in seen:
            raise DuplicateEpochError(raw.epoch, line=raw.source_line)
        seen.add(raw.epoch)
    records = tuple(
        canonical_record(raw, position, mapping)
        for position, raw in enumerate(ordered, start=1)
    )
    source_epochs = [raw.epoch for raw in ordered]
    metadata: dict[str, object] = {}
    if source_epochs != list(range(1, len(ordered) + 1)):
        metadata["source_epochs"] = source_epochs
    return TrainingRun(records=records, label=label, metadata=metadata)


def parse_jsonl(stream: Iterable[str] | Iterable[bytes] | IO,
                mapping: FieldMapping = DEFAULT_MAPPING,
                label: str = "") -> TrainingRun:
    """Parse newline-delimited JSON objects into a canonical run.

    Blank lines are skipped; anything else that fails to decode is a
    ParseError carrying its 1-based line number.
    """
    mapping.check()
    raws = []
    for lineno, line in enumerate(_text_lines(stream), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", line=lineno) from None
        raws.append(parse_jsonl_record(obj, lineno, mapping))
    return _build_run(raws, mapping, label)


def _csv_cell(row: list[str], index: int, col: str, rowno: int) -> str:
    if index >= len(row) or row[index].strip() == "":
        raise ParseError(f"missing value for column {col!r}",
                         line=rowno, column=col)
    return row[index].strip()


def parse_csv(stream: Iterable[str] | Iterable[bytes] | IO,
              mapping: FieldMapping = DEFAULT_MAPPING,
              label: str = "") -> TrainingRun:
    """Parse a headered CSV file into a canonical run.

    The header must contain every mapped column name; extra columns are
    ignored.  Row numbers in errors are physical (header = row 1).
    """
    mapping.check()
    reader = csv.reader(_text_lines(stream))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: missing header row") from None
    positions = {name.strip(): i for i, name in enumerate(header)}
    columns = {}
    for key in mapping.keys():
        if key not in positions:
            raise SchemaError(f"missing required column {key!r}",
                              key=key, line=1)
        columns[key] = positions[key]

    raws = []
    for rowno, row in enumerate(reader, start=2):
        if not row:
            continue
        epoch_cell = _csv_cell(row, columns[mapping.epoch_key],
                               mapping.epoch_key, rowno)
        try:
            epoch_value: object = int(epoch_cell)
        except ValueError:
            try:
                epoch_value = float(epoch_cell)
            except ValueError:
                raise ParseError(
                    f"unparseable integer {epoch_cell!r}",
                    line=rowno, column=mapping.epoch_key) from None
        epoch = _coerce_epoch(epoch_value, rowno, mapping.epoch_key)
        metrics = {}
        for canonical, attr in _SOURCE_KEYS.items():
            col = getattr(mapping, attr)
            cell = _csv_cell(row, columns[col], col, rowno)
            try:
                metrics[canonical] = float(cell)
            except ValueError:
                raise ParseError(f"unparseable number {cell!r}",
                                 line=rowno, column=col) from None
        raws.append(RawRecord(epoch=epoch, metrics=metrics, source_line=rowno))
    return _build_run(raws, mapping, label)


def validate_run(run: TrainingRun) -> list[Diagnostic]:
    """Collect every invariant violation in `run` without mutating it.

    Returns an empty list when the run is canonical and every record is
    in range and finite.
    """
    diagnostics: list[Diagnostic] = []
    if not run.records:
        diagnostics.append(Diagnostic(
            severity="error", category="empty", message="run has no records"))
        return diagnostics

    previous = None
    for position, record in enumerate(run.records, start=1):
        epoch = record.epoch
        if not isinstance(epoch, int) or epoch < 1:
            diagnostics.append(Diagnostic(
                severity="error", category="range",
                message=f"epoch must be a positive integer, got {epoch!r}",
                epoch=epoch if isinstance(epoch, int) else None,
                field="epoch"))
        elif previous is not None and epoch <= previous:
            diagnostics.append(Diagnostic(
                severity="error", category="sequence",
                message=f"epochs must increase: {epoch} follows {previous}",
                epoch=epoch, field="epoch"))
        elif epoch != position:
            diagnostics.append(Diagnostic(
                severity="error", category="sequence",
                message=f"epoch {epoch} at position {position}; canonical "
                        f"runs use ordinals 1..N",
                epoch=epoch, field="epoch"))
        previous = epoch if isinstance(epoch, int) else previous

        for name in ("train_loss", "val_loss", "train_acc", "val_acc"):
            value = getattr(record, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                diagnostics.append(Diagnostic(
                    severity="error", category="type",
                    message=f"{name} must be a number, got {value!r}",
                    epoch=record.epoch, field=name))
                continue
            if not math.isfinite(value):
                diagnostics.append(Diagnostic(
                    severity="error", category="non-finite",
                    message=f"{name} is non-finite ({value!r})",
                    epoch=record.epoch, field=name))
                continue
            if name.endswith("_loss") and value < 0:
                diagnostics.append(Diagnostic(
                    severity="error", category="range",
                    message=f"{name} must be >= 0, got {value}",
                    epoch=record.epoch, field=name))
            if name.endswith("_acc") and not 0.0 <= value <= 1.0:
                diagnostics.append(Diagnostic(
                    severity="error", category="range",
                    message=f"{name} must lie in [0, 1], got {value}",
                    epoch=record.epoch, field=name))
    return diagnostics


def write_jsonl(run: TrainingRun, stream: IO[str]) -> None:
    """Serialize a run as one JSON object per line under the default
    field names.  Floats round-trip exactly through repr."""
    for record in run.records:
        stream.write(json.dumps({
            "epoch": record.epoch,
            "train_loss": record.train_loss,
            "val_loss": record.val_loss,
            "train_acc": record.train_acc,
            "val_acc": record.val_acc,
        }) + "\n")


def write_csv(run: TrainingRun, stream: IO[str]) -> None:
    """Serialize a run as headered CSV under the default column names."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["epoch", "train_loss", "val_loss", "train_acc", "val_acc"])
    for record in run.records:
        writer.writerow([record.epoch, record.train_loss, record.val_loss,
                         record.train_acc, record.val_acc])
