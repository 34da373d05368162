"""Run comparison, ranking, augmentation summaries, plots, and stop advice.

Plot emitters are deliberately hand-rolled: the SVG writer produces the
same bytes for the same inputs (no timestamps, no generated ids), which
makes golden-file testing trivial, and the text renderer targets a fixed
80-column terminal.  Both default to the final 10 epochs of a run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

from .core import EpochRecord, OIResult, TrainingRun
from .errors import ValidationError

__all__ = [
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
]

# A run's score enters this module either as a full OIResult or as a bare
# total (published scores, external tools).  Bare totals carry no
# normalized value, so normalized deltas degrade to None.

def _total(value) -> float:
    if isinstance(value, OIResult):
        return value.total
    return float(value)


def _normalized(value) -> float | None:
    if isinstance(value, OIResult):
        return value.normalized
    return None


@dataclass(frozen=True)
class RunComparison:
    """Pairwise index comparison between a baseline and a variant run."""

    baseline_label: str
    variant_label: str
    baseline_oi: float
    variant_oi: float
    delta: float
    ratio: float | None
    normalized_delta: float | None

    @property
    def more_overfit(self) -> str | None:
        """Label of the run with the larger index, None on a tie."""
        if self.variant_oi > self.baseline_oi:
            return self.variant_label
        if self.variant_oi < self.baseline_oi:
            return self.baseline_label
        return None


@dataclass(frozen=True)
class Ranking:
    """Labels ordered by descending index; ties break lexicographically."""

    entries: tuple[tuple[str, float], ...]


class StopReason(enum.Enum):
    NO_OVERFIT_DETECTED = "no-overfit-detected"
    SUSTAINED_PENALTY_GROWTH = "sustained-penalty-growth"


@dataclass(frozen=True)
class StopAdvice:
    """Advisory stopping point derived from the per-epoch penalty trace."""

    suggested_epoch: int | None
    reason: StopReason
    onset_epoch: int | None


@dataclass(frozen=True)
class AugmentationSummary:
    """How many baseline/variant pairs saw a strict index reduction."""

    pairs: tuple[RunComparison, ...]
    n_pairs: int
    n_reduced: int


def compare(baseline: tuple[str, "OIResult | float"],
            variant: tuple[str, "OIResult | float"]) -> RunComparison:
    """Compare two scored runs; delta is variant minus baseline.

    The ratio is only defined for a positive baseline (None otherwise),
    and the normalized delta requires both sides to be full results.
    """
    baseline_label, baseline_value = baseline
    variant_label, variant_value = variant
    baseline_oi = _total(baseline_value)
    variant_oi = _total(variant_value)
    ratio = variant_oi / baseline_oi if baseline_oi > 0 else None
    b_norm = _normalized(baseline_value)
    v_norm = _normalized(variant_value)
    normalized_delta = (v_norm - b_norm
                        if b_norm is not None and v_norm is not None else None)
    return RunComparison(
        baseline_label=baseline_label,
        variant_label=variant_label,
        baseline_oi=baseline_oi,
        variant_oi=variant_oi,
        delta=variant_oi - baseline_oi,
        ratio=ratio,
        normalized_delta=normalized_delta,
    )


def rank(results: Sequence[tuple[str, "OIResult | float"]]) -> Ranking:
    """Order labeled results by descending index, ties by label."""
    if not results:
        raise ValidationError("rank requires at least one result",
                              field="results")
    labels = [label for label, _ in results]
    if len(set(labels)) != len(labels):
        dupe = next(l for i, l in enumerate(labels) if l in labels[:i])
        raise ValidationError(f"duplicate label {dupe!r} in ranking input",
                              field="results")
    scored = [(label, _total(value)) for label, value in results]
    scored.sort(key=lambda entry: (-entry[1], entry[0]))
    return Ranking(entries=tuple(scored))


def augmentation_effect(pairs: Sequence[RunComparison]) -> AugmentationSummary:
    """Summarize baseline-vs-variant pairs: a pair counts as reduced only
    when the variant index is strictly smaller."""
    if not pairs:
        raise ValidationError("augmentation_effect requires at least one pair",
                              field="pairs")
    n_reduced = sum(1 for pair in pairs if pair.variant_oi < pair.baseline_oi)
    return AugmentationSummary(pairs=tuple(pairs), n_pairs=len(pairs),
                               n_reduced=n_reduced)


def stop_advice(result: OIResult, patience: int,
                threshold: float = 0.0) -> StopAdvice:
    """Advise a stopping epoch when penalties exceed `threshold` for
    `patience` consecutive epochs.

    The advised epoch is the first of the earliest such streak.  Runs
    that never sustain a streak report NO_OVERFIT_DETECTED.
    """
    if not isinstance(patience, int) or patience < 1:
        raise ValidationError(f"patience must be an integer >= 1, got "
                              f"{patience!r}", field="patience")
    if threshold < 0:
        raise ValidationError(f"threshold must be >= 0, got {threshold}",
                              field="threshold")
    streak = 0
    for pen in result.trace:
        if pen.penalty > threshold:
            streak += 1
            if streak == patience:
                onset = pen.epoch - patience + 1
                return StopAdvice(suggested_epoch=onset,
                                  reason=StopReason.SUSTAINED_PENALTY_GROWTH,
                                  onset_epoch=onset)
        else:
            streak = 0
    return StopAdvice(suggested_epoch=None,
                      reason=StopReason.NO_OVERFIT_DETECTED,
                      onset_epoch=None)


# ---------------------------------------------------------------------------
# Plot emission
# ---------------------------------------------------------------------------

_SERIES = {
    "loss": ("train_loss", "val_loss"),
    "accuracy": ("train_acc", "val_acc"),
}

TRAIN_COLOR = "#1f77b4"
VAL_COLOR = "#d62728"

SVG_WIDTH = 640
SVG_HEIGHT = 400
_MARGIN_LEFT = 62
_MARGIN_RIGHT = 14
_MARGIN_TOP = 42
_MARGIN_BOTTOM = 48

TEXT_WIDTH = 80
_TEXT_ROWS = 16
_TEXT_GUTTER = 9


def plot(run: TrainingRun, metric: str = "loss",
         window: int | None = 10, fmt: str = "svg") -> str:
    """Render train vs validation curves over the last `window` epochs.

    `window=None` plots the whole run; a window longer than the run is
    clamped to it.  `fmt` is "svg" (SVG 1.1 document) or "text" (fixed
    80-column chart).  Output is byte-identical for identical inputs.
    """
    if metric not in _SERIES:
        raise ValidationError(f"metric must be one of {sorted(_SERIES)}, "
                              f"got {metric!r}", field="metric")
    if window is not None and (not isinstance(window, int) or window < 1):
        raise ValidationError(f"window must be a positive integer or None, "
                              f"got {window!r}", field="window")
    if not run.records:
        raise ValidationError("cannot plot an empty run", field="records")
    records = run.records if window is None else run.records[-window:]
    if fmt == "svg":
        return _render_svg(records, metric, run.label)
    if fmt == "text":
        return _render_text(records, metric, run.label)
    raise ValidationError(f"format must be 'svg' or 'text', got {fmt!r}",
                          field="fmt")


def _series(records: Sequence[EpochRecord], metric: str):
    train_field, val_field = _SERIES[metric]
    train = [getattr(r, train_field) for r in records]
    val = [getattr(r, val_field) for r in records]
    return train, val


def _value_range(train: list[float], val: list[float]) -> tuple[float, float]:
    lo = min(min(train), min(val))
    hi = max(max(train), max(val))
    if hi == lo:
        return lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _epoch_ticks(epochs: Sequence[int], max_ticks: int = 10) -> list[int]:
    if len(epochs) <= max_ticks:
        return list(epochs)
    step = -(-len(epochs) // max_ticks)
    ticks = list(epochs[::step])
    if ticks[-1] != epochs[-1]:
        ticks.append(epochs[-1])
    return ticks


def _render_svg(records: Sequence[EpochRecord], metric: str,
                label: str) -> str:
    train, val = _series(records, metric)
    epochs = [r.epoch for r in records]
    lo, hi = _value_range(train, val)

    x0, x1 = _MARGIN_LEFT, SVG_WIDTH - _MARGIN_RIGHT
    y0, y1 = _MARGIN_TOP, SVG_HEIGHT - _MARGIN_BOTTOM

    def sx(e: int) -> float:
        if epochs[-1] == epochs[0]:
            return (x0 + x1) / 2
        return x0 + (e - epochs[0]) * (x1 - x0) / (epochs[-1] - epochs[0])

    def sy(v: float) -> float:
        return y1 - (v - lo) * (y1 - y0) / (hi - lo)

    title = f"{label or 'run'}: {metric} (epochs {epochs[0]}..{epochs[-1]})"
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}">',
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'fill="#ffffff"/>',
        f'<text x="{SVG_WIDTH / 2:.2f}" y="24" text-anchor="middle" '
        f'font-family="monospace" font-size="14">{_esc(title)}</text>',
    ]

    # Horizontal gridlines and y tick labels at five evenly spaced values.
    for i in range(5):
        v = lo + i * (hi - lo) / 4
        y = sy(v)
        parts.append(f'<line x1="{x0}" y1="{y:.2f}" x2="{x1}" y2="{y:.2f}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 6}" y="{y + 4:.2f}" text-anchor="end" '
                     f'font-family="monospace" font-size="11">{v:.4g}</text>')

    for e in _epoch_ticks(epochs):
        x = sx(e)
        parts.append(f'<line x1="{x:.2f}" y1="{y1}" x2="{x:.2f}" '
                     f'y2="{y1 + 4}" stroke="#333333" stroke-width="1"/>')
        parts.append(f'<text x="{x:.2f}" y="{y1 + 18}" text-anchor="middle" '
                     f'font-family="monospace" font-size="11">{e}</text>')

    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" '
                 f'stroke="#333333" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" '
                 f'stroke="#333333" stroke-width="1"/>')
    parts.append(f'<text x="{(x0 + x1) / 2:.2f}" y="{SVG_HEIGHT - 12}" '
                 f'text-anchor="middle" font-family="monospace" '
                 f'font-size="12">epoch</text>')
    parts.append(f'<text x="16" y="{(y0 + y1) / 2:.2f}" text-anchor="middle" '
                 f'font-family="monospace" font-size="12" '
                 f'transform="rotate(-90 16 {(y0 + y1) / 2:.2f})">'
                 f'{metric}</text>')

    for values, color in ((train, TRAIN_COLOR), (val, VAL_COLOR)):
        points = " ".join(f"{sx(e):.2f},{sy(v):.2f}"
                          for e, v in zip(epochs, values))
        parts.append(f'<polyline points="{points}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        for e, v in zip(epochs, values):
            parts.append(f'<circle cx="{sx(e):.2f}" cy="{sy(v):.2f}" r="2.5" '
                         f'fill="{color}"/>')

    legend_x = x1 - 120
    for i, (name, color) in enumerate((("train", TRAIN_COLOR),
                                       ("validation", VAL_COLOR))):
        ly = y0 + 10 + 16 * i
        parts.append(f'<line x1="{legend_x}" y1="{ly}" x2="{legend_x + 22}" '
                     f'y2="{ly}" stroke="{color}" stroke-width="1.5"/>')
        parts.append(f'<text x="{legend_x + 28}" y="{ly + 4}" '
                     f'font-family="monospace" font-size="11">{name}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(text: str) -> str:
    return (text.replace("&", "&amp;").replace("<", "&lt;")
            .replace(">", "&gt;"))


def _render_text(records: Sequence[EpochRecord], metric: str,
                 label: str) -> str:
    train, val = _series(records, metric)
    epochs = [r.epoch for r in records]
    lo, hi = _value_range(train, val)
    area_w = TEXT_WIDTH - _TEXT_GUTTER - 1

    def col(i: int) -> int:
        if len(epochs) == 1:
            return area_w // 2
        return round(i * (area_w - 1) / (len(epochs) - 1))

    def row(v: float) -> int:
        bucket = round((v - lo) / (hi - lo) * (_TEXT_ROWS - 1))
        return _TEXT_ROWS - 1 - bucket

    canvas = [[" "] * area_w for _ in range(_TEXT_ROWS)]
    for i, v in enumerate(train):
        canvas[row(v)][col(i)] = "*"
    for i, v in enumerate(val):
        cell = canvas[row(v)][col(i)]
        canvas[row(v)][col(i)] = "#" if cell == "*" else "o"

    header = (f"{metric} for {label or 'run'} "
              f"(epochs {epochs[0]}..{epochs[-1]})")
    legend = "train:* val:o both:#"
    if len(header) + len(legend) + 2 <= TEXT_WIDTH:
        header = header + " " * (TEXT_WIDTH - len(header) - len(legend)) + legend
    lines = [header[:TEXT_WIDTH].rstrip()]

    mid = (_TEXT_ROWS - 1) // 2
    gutter_values = {0: hi, mid: lo + (hi - lo) * (_TEXT_ROWS - 1 - mid)
                     / (_TEXT_ROWS - 1), _TEXT_ROWS - 1: lo}
    for r in range(_TEXT_ROWS):
        if r in gutter_values:
            gutter = f"{gutter_values[r]:>{_TEXT_GUTTER}.4g}"
        else:
            gutter = " " * _TEXT_GUTTER
        lines.append((gutter + "|" + "".join(canvas[r])).rstrip())

    lines.append(" " * _TEXT_GUTTER + "+" + "-" * area_w)

    tick_cells = [" "] * area_w
    cursor = -1
    for i in _tick_indices(len(epochs)):
        text = str(epochs[i])
        start = min(col(i), area_w - len(text))
        if start <= cursor:
            continue
        tick_cells[start:start + len(text)] = list(text)
        cursor = start + len(text)
    lines.append((" " * (_TEXT_GUTTER + 1) + "".join(tick_cells)).rstrip())
    return "\n".join(lines) + "\n"


def _tick_indices(n: int) -> list[int]:
    if n == 1:
        return [0]
    raw = [0, n // 4, n // 2, (3 * n) // 4, n - 1]
    ticks = []
    for i in raw:
        if i not in ticks:
            ticks.append(i)
    return ticks
