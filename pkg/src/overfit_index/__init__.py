"""Epoch-weighted overfitting index over training/validation telemetry.

Quickstart:

    from overfit_index import EpochRecord, TrainingRun, compute_oi

    run = TrainingRun(records=(
        EpochRecord(1, train_loss=0.9, val_loss=1.1, train_acc=0.6, val_acc=0.55),
        EpochRecord(2, train_loss=0.6, val_loss=0.9, train_acc=0.7, val_acc=0.62),
    ), label="demo")
    result = compute_oi(run)
    print(result.total, result.normalized)
"""

from .core import (
    Driver,
    EpochPenalty,
    EpochRecord,
    OIAccumulator,
    OIResult,
    TrainingRun,
    accumulate,
    check_record,
    check_run,
    compute_oi,
    dominant_driver,
    epoch_penalty,
)
from .errors import (
    DuplicateEpochError,
    OverfitIndexError,
    ParseError,
    SchemaError,
    SequencingError,
    ValidationError,
)
from .ingest import (
    DEFAULT_MAPPING,
    AccuracyUnit,
    Diagnostic,
    FieldMapping,
    RawRecord,
    parse_csv,
    parse_jsonl,
    validate_run,
    write_csv,
    write_jsonl,
)
from .report import (
    AugmentationSummary,
    Ranking,
    RunComparison,
    StopAdvice,
    StopReason,
    augmentation_effect,
    compare,
    plot,
    rank,
    stop_advice,
)
from .synth import PRESETS, SynthSpec, generate, oracle_oi, preset

__version__ = "0.1.0"

__all__ = [
    "Driver",
    "EpochPenalty",
    "EpochRecord",
    "OIAccumulator",
    "OIResult",
    "TrainingRun",
    "accumulate",
    "check_record",
    "check_run",
    "compute_oi",
    "dominant_driver",
    "epoch_penalty",
    "OverfitIndexError",
    "ValidationError",
    "SequencingError",
    "ParseError",
    "SchemaError",
    "DuplicateEpochError",
    "AccuracyUnit",
    "FieldMapping",
    "RawRecord",
    "Diagnostic",
    "DEFAULT_MAPPING",
    "parse_jsonl",
    "parse_csv",
    "validate_run",
    "write_jsonl",
    "write_csv",
    "SynthSpec",
    "PRESETS",
    "generate",
    "oracle_oi",
    "preset",
    "RunComparison",
    "Ranking",
    "StopAdvice",
    "StopReason",
    "AugmentationSummary",
    "compare",
    "rank",
    "augmentation_effect",
    "plot",
    "stop_advice",
    "__version__",
]
