"""Epoch-weighted overfitting index over per-epoch training telemetry.

The index for an N-epoch run is

    total = sum over e in 1..N of  max(loss_gap(e), acc_gap(e)) * e

with the two gaps clamped at zero:

    loss_gap(e) = max(0, val_loss(e) - train_loss(e))
    acc_gap(e)  = max(0, train_acc(e) - val_acc(e))

A gap only counts against the run when validation is worse than training
on that axis; multiplying by the epoch ordinal weights late-training
divergence more heavily than early noise.  The module exposes the batch
computation (`compute_oi`), its per-epoch decomposition, and an
incremental form (`accumulate`) whose prefix sums match the batch result
bit for bit because both add contributions left to right in epoch order.

All operations are pure functions over immutable values and are safe to
call concurrently.  A single OIAccumulator must be threaded through one
run at a time; it is never mutated in place.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

from .errors import SequencingError, ValidationError

__all__ = [
    "Driver",
    "EpochRecord",
    "TrainingRun",
    "EpochPenalty",
    "OIResult",
    "OIAccumulator",
    "check_record",
    "check_run",
    "epoch_penalty",
    "compute_oi",
    "accumulate",
    "dominant_driver",
]


class Driver(enum.Enum):
    """Which clamped gap produced a penalty (or dominated a whole run)."""

    LOSS = "loss"
    ACCURACY = "accuracy"
    MIXED = "mixed"
    NONE = "none"


@dataclass(frozen=True)
class EpochRecord:
    """One epoch's four metrics.

    epoch is the 1-based ordinal within the run; accuracies are fractions
    in [0, 1]; losses are nonnegative.  Construction does not validate so
    that diagnostics can inspect bad data; operations validate on entry
    via `check_record`.
    """

    epoch: int
    train_loss: float
    val_loss: float
    train_acc: float
    val_acc: float


@dataclass(frozen=True)
class TrainingRun:
    """A validated, ordered sequence of epoch records plus metadata.

    Canonical runs carry epochs 1..N contiguously; ingestion re-indexes
    source logs into this form and keeps the original labels in
    `metadata`.  `augmented` tags the training regimen for comparisons.
    """

    records: tuple[EpochRecord, ...]
    label: str = ""
    augmented: bool = False
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class EpochPenalty:
    """Per-epoch decomposition of the index: both gaps, their max, and
    the epoch-weighted contribution."""

    epoch: int
    loss_gap: float
    acc_gap: float
    penalty: float
    contribution: float
    dominant: Driver


@dataclass(frozen=True)
class OIResult:
    """Total index plus the per-epoch trace it sums over.

    `normalized` divides the total by 1 + 2 + ... + N = N(N+1)/2, the
    largest weight mass a run of that length can carry, which makes runs
    of different lengths loosely comparable.  It is reported alongside
    the raw total, never instead of it.
    """

    total: float
    trace: tuple[EpochPenalty, ...]
    n_epochs: int
    normalized: float


@dataclass(frozen=True)
class OIAccumulator:
    """Running state for the streaming form of the index.

    After folding epochs 1..k, `running_total` equals the batch total of
    those k records exactly.  Fresh accumulators start at epoch 0.
    """

    running_total: float = 0.0
    epochs_seen: int = 0
    last_epoch: int = 0


_METRIC_FIELDS = ("train_loss", "val_loss", "train_acc", "val_acc")


def check_record(record: EpochRecord) -> None:
    """Raise ValidationError naming the first field that breaks an invariant."""
    epoch = record.epoch
    if not isinstance(epoch, int) or isinstance(epoch, bool):
        raise ValidationError(f"epoch must be an integer, got {epoch!r}",
                              field="epoch")
    if epoch < 1:
        raise ValidationError(f"epoch must be >= 1, got {epoch}", field="epoch")
    for name in _METRIC_FIELDS:
        value = getattr(record, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"{name} must be a number, got {value!r}",
                                  field=name)
        if not math.isfinite(value):
            raise ValidationError(f"{name} is non-finite ({value!r})",
                                  field=name)
    if record.train_loss < 0:
        raise ValidationError(f"train_loss must be >= 0, got {record.train_loss}",
                              field="train_loss")
    if record.val_loss < 0:
        raise ValidationError(f"val_loss must be >= 0, got {record.val_loss}",
                              field="val_loss")
    if not 0.0 <= record.train_acc <= 1.0:
        raise ValidationError(
            f"train_acc must lie in [0, 1], got {record.train_acc}",
            field="train_acc")
    if not 0.0 <= record.val_acc <= 1.0:
        raise ValidationError(
            f"val_acc must lie in [0, 1], got {record.val_acc}",
            field="val_acc")


def check_run(run: TrainingRun) -> None:
    """Raise ValidationError unless `run` is a canonical 1..N run of valid records."""
    if not run.records:
        raise ValidationError("run has no records", field="records")
    for position, record in enumerate(run.records, start=1):
        check_record(record)
        if record.epoch != position:
            raise ValidationError(
                f"epochs must be the canonical ordinals 1..N: position "
                f"{position} has epoch {record.epoch}",
                field="epoch")


def epoch_penalty(record: EpochRecord) -> EpochPenalty:
    """Clamped gaps, their max, and the epoch-weighted contribution.

    Ties between equal positive gaps report Driver.LOSS; a zero penalty
    reports Driver.NONE.
    """
    check_record(record)
    loss_gap = max(0.0, record.val_loss - record.train_loss)
    acc_gap = max(0.0, record.train_acc - record.val_acc)
    penalty = max(loss_gap, acc_gap)
    if penalty == 0.0:
        dominant = Driver.NONE
    elif loss_gap >= acc_gap:
        dominant = Driver.LOSS
    else:
        dominant = Driver.ACCURACY
    return EpochPenalty(
        epoch=record.epoch,
        loss_gap=loss_gap,
        acc_gap=acc_gap,
        penalty=penalty,
        contribution=penalty * record.epoch,
        dominant=dominant,
    )


def compute_oi(run: TrainingRun) -> OIResult:
    """Batch index over a whole run.

    Contributions are summed left to right in epoch order with no
    compensation, so the result is bit-identical to folding the same
    records through `accumulate`.
    """
    check_run(run)
    trace = []
    total = 0.0
    for record in run.records:
        pen = epoch_penalty(record)
        trace.append(pen)
        total += pen.contribution
    n = len(run.records)
    weight_mass = n * (n + 1) / 2
    return OIResult(
        total=total,
        trace=tuple(trace),
        n_epochs=n,
        normalized=total / weight_mass,
    )


def accumulate(acc: OIAccumulator, record: EpochRecord) -> OIAccumulator:
    """Fold one more epoch into the running index.

    Epochs must arrive contiguously: record.epoch == acc.last_epoch + 1.
    Returns a new accumulator; the input is untouched.
    """
    expected = acc.last_epoch + 1
    if record.epoch != expected:
        raise SequencingError(expected=expected, received=record.epoch)
    pen = epoch_penalty(record)
    return OIAccumulator(
        running_total=acc.running_total + pen.contribution,
        epochs_seen=acc.epochs_seen + 1,
        last_epoch=record.epoch,
    )


def dominant_driver(result: OIResult) -> Driver:
    """Summarize which gap drove the run's total.

    LOSS/ACCURACY when every nonzero-penalty epoch was driven by that
    gap, MIXED when both occur, NONE for a zero total.
    """
    if result.total == 0.0:
        return Driver.NONE
    kinds = {pen.dominant for pen in result.trace if pen.penalty > 0.0}
    if kinds == {Driver.LOSS}:
        return Driver.LOSS
    if kinds == {Driver.ACCURACY}:
        return Driver.ACCURACY
    return Driver.MIXED
