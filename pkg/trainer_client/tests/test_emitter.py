import json
import math
import subprocess
import sys

import pytest

# The primary package is the test oracle only; the client itself never
# touches it except through the CLI child process and the JSONL schema.
from overfit_index import EpochRecord, TrainingRun, compute_oi, parse_jsonl, validate_run

from trainer_client import ConfigurationError, EmitterConfig, MetricsEmitter

WATCH_JSON = (sys.executable, "-m", "overfit_index", "watch", "-", "--json")
WATCH_TEXT = (sys.executable, "-m", "overfit_index", "watch", "-")


def scripted_metrics(epoch: int) -> dict:
    return {
        "loss": 1.0 / epoch,
        "val_loss": 1.0 / epoch + 0.01 * max(0, epoch - 8),
        "accuracy": 1 - 1.0 / (epoch + 1),
        "val_accuracy": 1 - 1.3 / (epoch + 1),
    }


def reference_run(n: int) -> TrainingRun:
    records = []
    for e in range(1, n + 1):
        m = scripted_metrics(e)
        records.append(EpochRecord(e, m["loss"], m["val_loss"],
                                   m["accuracy"], m["val_accuracy"]))
    return TrainingRun(records=tuple(records), label="reference")


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------

def test_default_mapping_emits_schema_line(tmp_path):
    path = tmp_path / "run.jsonl"
    with MetricsEmitter(EmitterConfig(target=path)) as emitter:
        line = emitter.on_epoch_end(1, {"loss": 0.9, "val_loss": 1.1,
                                        "accuracy": 0.6, "val_accuracy": 0.55})
    assert json.loads(line) == {"epoch": 1, "train_loss": 0.9, "val_loss": 1.1,
                                "train_acc": 0.6, "val_acc": 0.55}
    assert path.read_text().strip() == line


def test_missing_mapped_key_raises_configuration_error(tmp_path):
    emitter = MetricsEmitter(EmitterConfig(target=tmp_path / "run.jsonl"))
    with pytest.raises(ConfigurationError) as err:
        emitter.on_epoch_end(1, {"loss": 0.9, "accuracy": 0.6,
                                 "val_accuracy": 0.55})
    assert "val_loss" in str(err.value)
    emitter.close()


def test_non_finite_value_raises_value_error(tmp_path):
    emitter = MetricsEmitter(EmitterConfig(target=tmp_path / "run.jsonl"))
    with pytest.raises(ValueError) as err:
        emitter.on_epoch_end(1, {"loss": float("nan"), "val_loss": 1.1,
                                 "accuracy": 0.6, "val_accuracy": 0.55})
    assert "loss" in str(err.value)
    emitter.close()


def test_bad_epoch_rejected(tmp_path):
    emitter = MetricsEmitter(EmitterConfig(target=tmp_path / "run.jsonl"))
    with pytest.raises(ValueError):
        emitter.on_epoch_end(-1, scripted_metrics(1))
    emitter.close()


def test_custom_mapping(tmp_path):
    path = tmp_path / "run.jsonl"
    config = EmitterConfig(target=path, mapping={
        "train_loss": "tr_l", "val_loss": "va_l",
        "train_acc": "tr_a", "val_acc": "va_a"})
    with MetricsEmitter(config) as emitter:
        emitter.on_epoch_end(1, {"tr_l": 0.5, "va_l": 0.6,
                                 "tr_a": 0.7, "va_a": 0.65})
    with open(path, encoding="utf-8") as fh:
        run = parse_jsonl(fh)
    assert run.records[0].val_acc == 0.65


def test_incomplete_mapping_rejected(tmp_path):
    config = EmitterConfig(target=tmp_path / "x.jsonl",
                           mapping={"train_loss": "loss"})
    with pytest.raises(ConfigurationError):
        MetricsEmitter(config)


def test_target_and_pipe_are_exclusive(tmp_path):
    config = EmitterConfig(target=tmp_path / "x.jsonl",
                           watch_command=WATCH_TEXT)
    with pytest.raises(ConfigurationError):
        MetricsEmitter(config)
    with pytest.raises(ConfigurationError):
        MetricsEmitter(EmitterConfig())


def test_ten_emissions_parse_into_ten_epoch_run(tmp_path):
    path = tmp_path / "run.jsonl"
    with MetricsEmitter(EmitterConfig(target=path)) as emitter:
        for e in range(1, 11):
            emitter.on_epoch_end(e, scripted_metrics(e))
    with open(path, encoding="utf-8") as fh:
        run = parse_jsonl(fh)
    assert len(run.records) == 10
    assert [r.epoch for r in run.records] == list(range(1, 11))


def test_close_is_idempotent(tmp_path):
    emitter = MetricsEmitter(EmitterConfig(target=tmp_path / "run.jsonl"))
    emitter.on_epoch_end(1, scripted_metrics(1))
    emitter.close()
    emitter.close()  # no error
    with pytest.raises(ValueError):
        emitter.on_epoch_end(2, scripted_metrics(2))


def test_emitting_appends_across_emitters(tmp_path):
    path = tmp_path / "run.jsonl"
    with MetricsEmitter(EmitterConfig(target=path)) as emitter:
        emitter.on_epoch_end(1, scripted_metrics(1))
    with MetricsEmitter(EmitterConfig(target=path)) as emitter:
        emitter.on_epoch_end(2, scripted_metrics(2))
    with open(path, encoding="utf-8") as fh:
        assert len(parse_jsonl(fh).records) == 2


# ---------------------------------------------------------------------------
# acceptance: emitted file equals direct computation
# ---------------------------------------------------------------------------

def test_twenty_epoch_loop_parses_clean_and_matches_core(tmp_path):
    path = tmp_path / "train.jsonl"
    with MetricsEmitter(EmitterConfig(target=path)) as emitter:
        for e in range(1, 21):
            emitter.on_epoch_end(e, scripted_metrics(e))

    with open(path, encoding="utf-8") as fh:
        run = parse_jsonl(fh)
    assert validate_run(run) == []

    cli = subprocess.run(
        [sys.executable, "-m", "overfit_index", "compute", str(path), "--json"],
        capture_output=True, text=True, timeout=60)
    assert cli.returncode == 0
    cli_total = json.loads(cli.stdout)["total"]
    expected = compute_oi(reference_run(20)).total
    assert math.isclose(cli_total, expected, rel_tol=1e-12, abs_tol=1e-12)
    print(f"PASS emitted 20-epoch file: zero diagnostics, cli total "
          f"{cli_total!r} == core total {expected!r}")


# ---------------------------------------------------------------------------
# acceptance: pipe mode into watch
# ---------------------------------------------------------------------------

def test_pipe_mode_one_line_per_epoch_and_matching_summary():
    config = EmitterConfig(watch_command=WATCH_JSON)
    emitter = MetricsEmitter(config, stdout=subprocess.PIPE)
    n = 12
    for e in range(1, n + 1):
        emitter.on_epoch_end(e, scripted_metrics(e))
    emitter.close()

    events = [json.loads(line) for line in emitter.watch_output.splitlines()]
    epoch_events = [ev for ev in events if ev["event"] == "epoch"]
    assert len(epoch_events) == n
    summary = events[-1]
    assert summary["event"] == "summary"
    assert summary["n_epochs"] == n
    assert summary["total"] == compute_oi(reference_run(n)).total
    print(f"PASS pipe mode: {n} epoch lines, summary total "
          f"{summary['total']!r} matches batch compute")


def test_pipe_close_after_three_reports_three_epochs():
    emitter = MetricsEmitter(EmitterConfig(watch_command=WATCH_JSON),
                             stdout=subprocess.PIPE)
    for e in range(1, 4):
        emitter.on_epoch_end(e, scripted_metrics(e))
    emitter.close()
    summary = json.loads(emitter.watch_output.splitlines()[-1])
    assert summary["n_epochs"] == 3


def test_pipe_close_with_zero_emissions():
    emitter = MetricsEmitter(EmitterConfig(watch_command=WATCH_JSON),
                             stdout=subprocess.PIPE)
    emitter.close()
    summary = json.loads(emitter.watch_output.splitlines()[-1])
    assert summary["n_epochs"] == 0
    assert summary["total"] == 0.0


def test_pipe_percent_unit_flag_travels_to_watch():
    config = EmitterConfig(watch_command=WATCH_JSON, accuracy_unit="percent")
    emitter = MetricsEmitter(config, stdout=subprocess.PIPE)
    for e in range(1, 6):
        m = scripted_metrics(e)
        m["accuracy"] *= 100.0
        m["val_accuracy"] *= 100.0
        emitter.on_epoch_end(e, m)
    emitter.close()
    summary = json.loads(emitter.watch_output.splitlines()[-1])
    expected = compute_oi(reference_run(5)).total
    assert math.isclose(summary["total"], expected, rel_tol=1e-12,
                        abs_tol=1e-12)
