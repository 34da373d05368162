"""Parametric synthetic learning curves with an analytically known index.

The curve family is chosen so the index has a short closed form:

    train_loss(e) = floor + (start - floor) * exp(-decay * e)
    val_loss(e)   = train_loss(e) + slope * max(0, e - onset)
    train_acc(e)  = ceiling_train * (1 - exp(-acc_rate * e))
    val_acc(e)    = min(train_acc(e), ceiling_val * (1 - exp(-acc_rate * e)))

Training loss decays exponentially toward a floor; validation loss
tracks it until `divergence_onset` and then separates linearly with
`divergence_slope`; accuracies saturate toward their ceilings.  With
noise_amplitude = 0 the generator is deterministic and `oracle_oi` sums
the gap expressions directly, independent of the record-based pipeline,
which makes it a verification oracle for the whole compute path.
Optional bounded uniform noise (from the seeded generator) produces
wigglier fixtures; the oracle refuses noisy specs because it would no
longer be exact.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .core import EpochRecord, TrainingRun
from .errors import ValidationError

__all__ = ["SynthSpec", "PRESETS", "check_spec", "generate", "oracle_oi",
           "preset"]


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic learning-curve family member."""

    n_epochs: int = 30
    train_loss_start: float = 1.2
    train_loss_floor: float = 0.2
    loss_decay: float = 0.15
    divergence_onset: int = 0
    divergence_slope: float = 0.0
    acc_ceiling_train: float = 0.9
    acc_ceiling_val: float = 0.9
    acc_rate: float = 0.2
    seed: int = 0
    noise_amplitude: float = 0.0


def check_spec(spec: SynthSpec) -> None:
    """Raise ValidationError naming the first out-of-range parameter."""
    if not isinstance(spec.n_epochs, int) or spec.n_epochs < 1:
        raise ValidationError(f"n_epochs must be >= 1, got {spec.n_epochs!r}",
                              field="n_epochs")
    for name in ("train_loss_start", "train_loss_floor", "divergence_slope",
                 "noise_amplitude"):
        value = getattr(spec, name)
        if not math.isfinite(value) or value < 0:
            raise ValidationError(f"{name} must be a finite nonnegative "
                                  f"number, got {value!r}", field=name)
    for name in ("loss_decay", "acc_rate"):
        value = getattr(spec, name)
        if not math.isfinite(value) or value <= 0:
            raise ValidationError(f"{name} must be a finite positive number, "
                                  f"got {value!r}", field=name)
    for name in ("acc_ceiling_train", "acc_ceiling_val"):
        value = getattr(spec, name)
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ValidationError(f"{name} must lie in [0, 1], got {value!r}",
                                  field=name)
    if not isinstance(spec.divergence_onset, int) or spec.divergence_onset < 0:
        raise ValidationError(
            f"divergence_onset must be an integer >= 0, got "
            f"{spec.divergence_onset!r}", field="divergence_onset")


def _curves(spec: SynthSpec, e: int) -> tuple[float, float, float, float]:
    span = spec.train_loss_start - spec.train_loss_floor
    train_loss = spec.train_loss_floor + span * math.exp(-spec.loss_decay * e)
    val_loss = train_loss + spec.divergence_slope * max(0, e - spec.divergence_onset)
    frac = 1.0 - math.exp(-spec.acc_rate * e)
    train_acc = spec.acc_ceiling_train * frac
    val_acc = min(train_acc, spec.acc_ceiling_val * frac)
    return train_loss, val_loss, train_acc, val_acc


def generate(spec: SynthSpec, label: str = "synth") -> TrainingRun:
    """Generate the run described by `spec`.

    Deterministic for noise_amplitude = 0; otherwise each metric gets a
    uniform perturbation in [-amplitude, +amplitude] from the seeded
    generator and is re-clamped to its valid range.
    """
    check_spec(spec)
    rng = random.Random(spec.seed) if spec.noise_amplitude > 0 else None
    records = []
    for e in range(1, spec.n_epochs + 1):
        train_loss, val_loss, train_acc, val_acc = _curves(spec, e)
        if rng is not None:
            amp = spec.noise_amplitude
            train_loss += rng.uniform(-amp, amp)
            val_loss += rng.uniform(-amp, amp)
            train_acc += rng.uniform(-amp, amp)
            val_acc += rng.uniform(-amp, amp)
        records.append(EpochRecord(
            epoch=e,
            train_loss=max(0.0, train_loss),
            val_loss=max(0.0, val_loss),
            train_acc=min(1.0, max(0.0, train_acc)),
            val_acc=min(1.0, max(0.0, val_acc)),
        ))
    return TrainingRun(records=tuple(records), label=label,
                       metadata={"synthetic": True})


def oracle_oi(spec: SynthSpec) -> float:
    """Closed-form index of a noise-free spec.

    Sums max(loss_gap, acc_gap) * e directly from the gap expressions,
    without building records, so it stays independent of the record
    pipeline it is used to verify.
    """
    check_spec(spec)
    if spec.noise_amplitude != 0:
        raise ValidationError(
            "unsupported: the closed-form oracle requires noise_amplitude = 0",
            field="noise_amplitude")
    ceiling_gap = max(0.0, spec.acc_ceiling_train - spec.acc_ceiling_val)
    total = 0.0
    for e in range(1, spec.n_epochs + 1):
        loss_gap = spec.divergence_slope * max(0, e - spec.divergence_onset)
        acc_gap = ceiling_gap * (1.0 - math.exp(-spec.acc_rate * e))
        total += max(loss_gap, acc_gap) * e
    return total


# Fixed preset constants (documented in the README):
# - well-generalized: no divergence, matched ceilings, index exactly 0.
# - overfit-late: validation loss separates after epoch 5 of 10 at slope
#   0.02/epoch; closed form gives 0.02 * (1*6 + 2*7 + 3*8 + 4*9 + 5*10) = 2.6.
# - overfit-early: separation from epoch 1 at slope 0.05/epoch;
#   0.05 * sum(e^2, e=1..10) = 19.25.
# - accuracy-driven: losses never separate; the accuracy ceilings differ
#   by 0.15, so every penalty comes from the accuracy gap.
PRESETS: dict[str, SynthSpec] = {
    "well-generalized": SynthSpec(
        n_epochs=30, train_loss_start=1.2, train_loss_floor=0.2,
        loss_decay=0.15, divergence_onset=0, divergence_slope=0.0,
        acc_ceiling_train=0.9, acc_ceiling_val=0.9, acc_rate=0.2),
    "overfit-late": SynthSpec(
        n_epochs=10, train_loss_start=1.0, train_loss_floor=0.2,
        loss_decay=0.3, divergence_onset=5, divergence_slope=0.02,
        acc_ceiling_train=0.9, acc_ceiling_val=0.9, acc_rate=0.3),
    "overfit-early": SynthSpec(
        n_epochs=10, train_loss_start=1.0, train_loss_floor=0.2,
        loss_decay=0.3, divergence_onset=0, divergence_slope=0.05,
        acc_ceiling_train=0.9, acc_ceiling_val=0.9, acc_rate=0.3),
    "accuracy-driven": SynthSpec(
        n_epochs=10, train_loss_start=1.0, train_loss_floor=0.2,
        loss_decay=0.3, divergence_onset=0, divergence_slope=0.0,
        acc_ceiling_train=0.95, acc_ceiling_val=0.8, acc_rate=0.3),
}


def preset(name: str) -> SynthSpec:
    """Look up a fixed preset spec by its kebab-case name."""
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValidationError(f"unknown preset {name!r}; known presets: "
                              f"{known}", field="preset") from None
