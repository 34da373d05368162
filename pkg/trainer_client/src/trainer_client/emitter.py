"""Per-epoch telemetry emitter for training loops.

One emitter serializes the four run metrics (train/val loss, train/val
accuracy) to the JSONL schema the `oi` CLI ingests, either appending to
a file or streaming into a spawned `oi watch -` child so the index
updates live as epochs complete.  The emitter does no scoring of its
own; the one implementation of the index lives behind the CLI.

Each emission is flushed immediately (line-buffered), so a watcher on
the other end of a pipe sees every epoch as it happens, and `close()`
signals end-of-stream so the watcher prints its final summary.
"""

from __future__ import annotations

import json
import math
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Mapping, Sequence

__all__ = [
    "DEFAULT_MAPPING",
    "DEFAULT_WATCH_COMMAND",
    "ConfigurationError",
    "EmitterConfig",
    "MetricsEmitter",
]

# canonical schema field -> host framework's log key (Keras-style defaults)
DEFAULT_MAPPING: dict[str, str] = {
    "train_loss": "loss",
    "val_loss": "val_loss",
    "train_acc": "accuracy",
    "val_acc": "val_accuracy",
}

DEFAULT_WATCH_COMMAND: tuple[str, ...] = ("oi", "watch", "-")

_CANONICAL_FIELDS = ("train_loss", "val_loss", "train_acc", "val_acc")


class ConfigurationError(ValueError):
    """The emitter configuration or an emission is missing a mapped key."""


@dataclass(frozen=True)
class EmitterConfig:
    """Where emissions go and how host metric names map onto the schema.

    Exactly one of `target` (JSONL file, appended) or `watch_command`
    (argv of a watcher child fed via stdin) must be set.  When the host
    logs accuracies as percentages, declare `accuracy_unit="percent"`;
    values are passed through verbatim and the unit flag travels to the
    watcher (pipe mode) or must be given to the CLI at compute time
    (file mode).
    """

    target: str | Path | None = None
    watch_command: Sequence[str] | None = None
    mapping: Mapping[str, str] = field(
        default_factory=lambda: dict(DEFAULT_MAPPING))
    accuracy_unit: str = "fraction"

    def check(self) -> None:
        if (self.target is None) == (self.watch_command is None):
            raise ConfigurationError(
                "exactly one of target or watch_command must be set")
        missing = [name for name in _CANONICAL_FIELDS
                   if not self.mapping.get(name)]
        if missing:
            raise ConfigurationError(
                f"mapping must name a source key for {', '.join(missing)}")
        if self.accuracy_unit not in ("fraction", "percent"):
            raise ConfigurationError(
                f"accuracy_unit must be 'fraction' or 'percent', got "
                f"{self.accuracy_unit!r}")


class MetricsEmitter:
    """Append one schema-valid JSONL line per completed epoch.

    Usable as a context manager; `close()` is idempotent.  One emitter
    serves one training run, called from the training loop's thread.
    """

    def __init__(self, config: EmitterConfig, *, stdout: IO | int | None = None):
        config.check()
        self.config = config
        self.epochs_emitted = 0
        self.watch_output: str | None = None
        self._closed = False
        self._process: subprocess.Popen | None = None
        if config.watch_command is not None:
            command = list(config.watch_command)
            if config.accuracy_unit == "percent":
                command.append("--percent")
            self._process = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=stdout, text=True)
            self._sink = self._process.stdin
        else:
            # buffering=1 keeps the file line-buffered so a tail -f style
            # reader sees epochs as they land.
            self._sink = open(config.target, "a", encoding="utf-8",
                              buffering=1)

    def __enter__(self) -> "MetricsEmitter":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()

    def on_epoch_end(self, epoch: int, metrics: Mapping[str, object]) -> str:
        """Serialize one epoch; returns the emitted line.

        Raises ConfigurationError when a mapped key is absent from
        `metrics` and ValueError for non-finite values or a bad epoch.
        """
        if self._closed:
            raise ValueError("emitter is closed")
        if not isinstance(epoch, int) or isinstance(epoch, bool) or epoch < 0:
            raise ValueError(f"epoch must be an integer >= 0, got {epoch!r}")
        row: dict[str, object] = {"epoch": epoch}
        for name in _CANONICAL_FIELDS:
            key = self.config.mapping[name]
            if key not in metrics:
                raise ConfigurationError(
                    f"metrics are missing key {key!r} (mapped to {name})")
            value = metrics[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValueError(f"{key} must be a number, got {value!r}")
            if not math.isfinite(value):
                raise ValueError(f"{key} is non-finite ({value!r})")
            row[name] = float(value)
        line = json.dumps(row)
        self._sink.write(line + "\n")
        self._sink.flush()
        self.epochs_emitted += 1
        return line

    def close(self) -> None:
        """Flush and close the target; a second close is a no-op.

        In pipe mode the watcher sees end-of-stream, emits its summary,
        and its captured stdout (if piped) lands in `watch_output`.
        """
        if self._closed:
            return
        self._closed = True
        self._sink.close()
        if self._process is not None:
            if self._process.stdout is not None:
                self.watch_output = self._process.stdout.read()
                self._process.stdout.close()
            self._process.wait()
