"""Protocol conformance against the optimizer's subprocess client.

Two layers: frozen message transcripts checked line by line, and live
round-trips where botune's run_external_trainee drives adapter scripts,
covering the happy path, the capability-downgrade path, and the
error-message path.
"""
import io
import json
import sys

import pytest

from trainee_bridge import FinalMetrics, TraineeAdapter, serve

botune_trainees = pytest.importorskip(
    "botune.trainees", reason="conformance runs against the installed optimizer"
)
from botune.errors import TraineeCrashed
from botune.trainees import TrainRequest, run_external_trainee


# --- recorded transcripts -----------------------------------------------------

TRANSCRIPT_INBOUND = [
    {"type": "train", "assignment": {"lr": 0.01, "batch": 32}, "directives": [],
     "epochs": 2, "seed": 5},
    {"type": "train", "assignment": {"lr": 0.10, "batch": 8},
     "directives": ["l2_regularization"], "epochs": 1, "seed": 6},
]

TRANSCRIPT_EXPECTED = [
    {"type": "capabilities", "version": 1, "directives": ["l2_regularization"],
     "name": "transcript"},
    {"type": "epoch", "epoch": 0, "train_loss": 1.0, "val_loss": 1.2,
     "train_acc": 0.5, "val_acc": 0.45},
    {"type": "epoch", "epoch": 1, "train_loss": 0.5, "val_loss": 0.6,
     "train_acc": 0.55, "val_acc": 0.5},
    {"type": "result", "objective": 0.6, "final_val_loss": 0.6, "final_val_acc": 0.5},
    {"type": "epoch", "epoch": 0, "train_loss": 1.0, "val_loss": 1.2,
     "train_acc": 0.5, "val_acc": 0.45},
    {"type": "result", "objective": 1.2, "final_val_loss": 1.2, "final_val_acc": 0.45},
]


def deterministic_curves(assignment, directives, epochs, seed, emit_epoch):
    val_loss = None
    for i in range(epochs):
        val_loss = 1.2 / (i + 1)
        emit_epoch(1.0 / (i + 1), val_loss, 0.5 + 0.05 * i, 0.45 + 0.05 * i)
    return FinalMetrics(val_loss, val_loss, 0.45 + 0.05 * (epochs - 1))


def test_recorded_transcript_replay():
    stdin = io.StringIO("".join(json.dumps(m) + "\n" for m in TRANSCRIPT_INBOUND))
    stdout = io.StringIO()
    serve(TraineeAdapter(deterministic_curves, ("l2_regularization",), "transcript"),
          stdin, stdout)
    got = [json.loads(line) for line in stdout.getvalue().splitlines()]
    assert got == TRANSCRIPT_EXPECTED


# --- live round-trips through the subprocess client ---------------------------

ADAPTER_TEMPLATE = """
import json
import sys

from trainee_bridge import FinalMetrics, TraineeAdapter, serve

DUMP = {dump!r}


def train(assignment, directives, epochs, seed, emit_epoch):
    if DUMP:
        with open(DUMP, "w") as fh:
            json.dump({{"assignment": assignment, "directives": list(directives),
                       "epochs": epochs, "seed": seed}}, fh)
{body}

serve(TraineeAdapter(train, {directives!r}, "conformance"))
"""

HAPPY_BODY = """\
    loss = None
    for i in range(epochs):
        loss = round(1.5 / (i + 1), 6)
        emit_epoch(loss * 0.9, loss, min(0.95, 0.4 + 0.1 * i), min(0.9, 0.35 + 0.1 * i))
    return FinalMetrics(loss, loss, min(0.9, 0.35 + 0.1 * (epochs - 1)))
"""

RAISING_BODY = """\
    raise RuntimeError("optimizer unplugged")
"""


def write_adapter(tmp_path, body, directives, dump=None):
    script = tmp_path / "adapter.py"
    script.write_text(ADAPTER_TEMPLATE.format(
        body=body, directives=tuple(directives), dump=str(dump) if dump else ""
    ))
    return [sys.executable, str(script)]


def test_happy_path_round_trip(tmp_path):
    command = write_adapter(
        tmp_path, HAPPY_BODY, ("l2_regularization", "batch_normalization")
    )
    request = TrainRequest({"lr": 0.01, "batch": 16}, (), epochs=4, seed=1)
    history, result = run_external_trainee(command, request, timeout_s=30)
    assert history.epochs == 4
    assert history.val_loss[0] == pytest.approx(1.5)
    assert result.objective == pytest.approx(1.5 / 4, abs=1e-6)


def test_paper_style_assignment_round_trips_unchanged(tmp_path):
    dump = tmp_path / "request.json"
    command = write_adapter(tmp_path, HAPPY_BODY, ("l2_regularization",), dump)
    assignment = {
        "conv1_units": 32, "conv2_units": 96, "drop1": 0.15, "drop2": 0.4,
        "fc_units": 384, "lr": 1e-3,
    }
    run_external_trainee(command, TrainRequest(assignment, (), 2, 3), timeout_s=30)
    received = json.loads(dump.read_text())
    assert received["assignment"] == assignment
    assert received["epochs"] == 2
    assert received["seed"] == 3


def test_capability_downgrade_path(tmp_path, caplog):
    dump = tmp_path / "request.json"
    command = write_adapter(tmp_path, HAPPY_BODY, ("l2_regularization",), dump)
    request = TrainRequest(
        {"lr": 0.01}, ("l2_regularization", "batch_normalization"), epochs=2, seed=0
    )
    with caplog.at_level("WARNING"):
        history, _ = run_external_trainee(command, request, timeout_s=30)
    assert history.epochs == 2
    assert "batch_normalization" in caplog.text
    received = json.loads(dump.read_text())
    assert received["directives"] == ["l2_regularization"]


def test_error_message_path(tmp_path):
    command = write_adapter(tmp_path, RAISING_BODY, ("l2_regularization",))
    with pytest.raises(TraineeCrashed, match="optimizer unplugged"):
        run_external_trainee(command, TrainRequest({"lr": 0.01}, (), 2, 0), timeout_s=30)
