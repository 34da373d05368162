import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from overfit_index import (
    Driver,
    SynthSpec,
    ValidationError,
    compute_oi,
    dominant_driver,
    generate,
    oracle_oi,
    preset,
    validate_run,
)
from overfit_index.synth import PRESETS
from strategies import noise_free_specs


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_zero_gap_spec_has_zero_index():
    spec = SynthSpec(n_epochs=20, divergence_slope=0.0,
                     acc_ceiling_train=0.85, acc_ceiling_val=0.85)
    run = generate(spec)
    for r in run.records:
        assert r.val_loss == r.train_loss
        assert r.val_acc == r.train_acc
    assert compute_oi(run).total == 0.0


def test_generate_deterministic_without_noise():
    spec = SynthSpec(n_epochs=15, divergence_onset=5, divergence_slope=0.04)
    assert generate(spec).records == generate(spec).records


def test_generate_deterministic_with_seeded_noise():
    spec = SynthSpec(n_epochs=15, noise_amplitude=0.05, seed=42)
    assert generate(spec).records == generate(spec).records


def test_generate_different_seeds_differ():
    base = SynthSpec(n_epochs=15, noise_amplitude=0.05, seed=1)
    other = SynthSpec(n_epochs=15, noise_amplitude=0.05, seed=2)
    assert generate(base).records != generate(other).records


def test_post_onset_gaps_follow_slope():
    spec = SynthSpec(n_epochs=10, divergence_onset=5, divergence_slope=0.02,
                     acc_ceiling_train=0.9, acc_ceiling_val=0.9, acc_rate=0.3)
    result = compute_oi(generate(spec))
    for pen in result.trace:
        expected = 0.02 * max(0, pen.epoch - 5)
        assert pen.penalty == pytest.approx(expected, rel=1e-9, abs=1e-15)
        if pen.penalty > 0:
            assert pen.dominant is Driver.LOSS


@given(noise_free_specs())
def test_generated_runs_are_valid(spec):
    assert validate_run(generate(spec)) == []


@given(noise_free_specs(), st.floats(0.0, 0.5), st.integers(0, 2**31 - 1))
def test_noisy_runs_are_valid(spec, amplitude, seed):
    from dataclasses import replace
    noisy = replace(spec, noise_amplitude=amplitude, seed=seed)
    assert validate_run(generate(noisy)) == []


@pytest.mark.parametrize("kwargs, field", [
    (dict(n_epochs=0), "n_epochs"),
    (dict(loss_decay=0.0), "loss_decay"),
    (dict(loss_decay=-0.1), "loss_decay"),
    (dict(acc_rate=0.0), "acc_rate"),
    (dict(divergence_slope=-0.01), "divergence_slope"),
    (dict(divergence_onset=-1), "divergence_onset"),
    (dict(acc_ceiling_train=1.2), "acc_ceiling_train"),
    (dict(acc_ceiling_val=-0.2), "acc_ceiling_val"),
    (dict(train_loss_start=-1.0), "train_loss_start"),
    (dict(noise_amplitude=-0.1), "noise_amplitude"),
])
def test_generate_rejects_invalid_spec(kwargs, field):
    with pytest.raises(ValidationError) as err:
        generate(SynthSpec(**kwargs))
    assert err.value.field == field


# ---------------------------------------------------------------------------
# oracle_oi
# ---------------------------------------------------------------------------

def test_oracle_zero_gap():
    assert oracle_oi(SynthSpec(divergence_slope=0.0, acc_ceiling_train=0.8,
                               acc_ceiling_val=0.8)) == 0.0


def test_oracle_hand_value():
    spec = SynthSpec(n_epochs=10, divergence_onset=5, divergence_slope=0.02,
                     acc_ceiling_train=0.9, acc_ceiling_val=0.9)
    value = oracle_oi(spec)
    # Brute-force re-summation of the five post-onset terms.
    brute = sum(0.02 * (e - 5) * e for e in range(6, 11))
    assert value == brute
    assert value == pytest.approx(2.6, rel=1e-12)


def test_oracle_single_epoch_constant_gap():
    spec = SynthSpec(n_epochs=1, divergence_onset=0, divergence_slope=0.07,
                     acc_ceiling_train=0.5, acc_ceiling_val=0.5)
    assert oracle_oi(spec) == pytest.approx(0.07, rel=1e-12)


def test_oracle_rejects_noisy_spec():
    with pytest.raises(ValidationError) as err:
        oracle_oi(SynthSpec(noise_amplitude=0.1))
    assert "unsupported" in str(err.value)


@given(noise_free_specs())
def test_oracle_agrees_with_computed_index(spec):
    computed = compute_oi(generate(spec)).total
    expected = oracle_oi(spec)
    assert math.isclose(computed, expected, rel_tol=1e-9, abs_tol=1e-12)


@given(noise_free_specs(), st.integers(1, 400), st.integers(1, 400))
def test_index_monotone_in_divergence_slope(spec, a, b):
    from dataclasses import replace
    if a == b:
        return
    g1, g2 = sorted((a, b))
    # Equal ceilings keep the accuracy branch silent; onset inside the run
    # guarantees at least one loss term, so a larger slope must win.
    lo = replace(spec, divergence_slope=g1 / 400, divergence_onset=0,
                 acc_ceiling_val=spec.acc_ceiling_train)
    hi = replace(spec, divergence_slope=g2 / 400, divergence_onset=0,
                 acc_ceiling_val=spec.acc_ceiling_train)
    assert oracle_oi(hi) > oracle_oi(lo)
    assert compute_oi(generate(hi)).total > compute_oi(generate(lo)).total


@given(noise_free_specs(), st.data())
def test_index_nonincreasing_in_onset(spec, data):
    from dataclasses import replace
    later_onset = data.draw(st.integers(0, spec.n_epochs + 3), label="later")
    earlier_onset = data.draw(st.integers(0, later_onset), label="earlier")
    base = replace(spec, acc_ceiling_val=spec.acc_ceiling_train)
    late = replace(base, divergence_onset=later_onset)
    early = replace(base, divergence_onset=earlier_onset)
    assert oracle_oi(early) >= oracle_oi(late)
    assert compute_oi(generate(early)).total >= compute_oi(generate(late)).total


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def test_well_generalized_preset_scores_zero():
    spec = preset("well-generalized")
    assert oracle_oi(spec) == 0.0
    assert compute_oi(generate(spec)).total == 0.0


def test_overfit_presets_are_strongly_positive():
    floor = 10 * oracle_oi(preset("well-generalized")) + 1
    assert oracle_oi(preset("overfit-late")) >= floor
    assert oracle_oi(preset("overfit-early")) >= floor


def test_overfit_late_preset_hand_value():
    assert oracle_oi(preset("overfit-late")) == pytest.approx(2.6, rel=1e-9)


def test_accuracy_driven_preset_driver():
    run = generate(preset("accuracy-driven"))
    result = compute_oi(run)
    assert result.total > 0
    assert dominant_driver(result) is Driver.ACCURACY


def test_all_presets_generate_valid_runs():
    for name in PRESETS:
        assert validate_run(generate(preset(name))) == []


def test_unknown_preset_lists_names():
    with pytest.raises(ValidationError) as err:
        preset("does-not-exist")
    message = str(err.value)
    for name in PRESETS:
        assert name in message
