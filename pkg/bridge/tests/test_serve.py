import io
import json

import pytest

from trainee_bridge import FinalMetrics, TraineeAdapter, serve


def fixed_curves(assignment, directives, epochs, seed, emit_epoch):
    for i in range(epochs):
        emit_epoch(1.0 / (i + 1), 1.2 / (i + 1), 0.5, 0.6)
    return FinalMetrics(1.2 / epochs, 1.2 / epochs, 0.6)


def drive(adapter, *messages):
    stdin = io.StringIO("".join(json.dumps(m) + "\n" for m in messages))
    stdout = io.StringIO()
    serve(adapter, stdin, stdout)
    return [json.loads(line) for line in stdout.getvalue().splitlines()]


def train_msg(epochs=2, assignment=None, directives=(), seed=0):
    return {
        "type": "train",
        "assignment": assignment or {"lr": 0.1},
        "directives": list(directives),
        "epochs": epochs,
        "seed": seed,
    }


class TestServe:
    def test_capabilities_come_first(self):
        adapter = TraineeAdapter(fixed_curves, ("l2_regularization",), "unit-test")
        out = drive(adapter)
        assert out == [{
            "type": "capabilities",
            "version": 1,
            "directives": ["l2_regularization"],
            "name": "unit-test",
        }]

    def test_loopback_two_epochs(self):
        out = drive(TraineeAdapter(fixed_curves), train_msg(epochs=2))
        assert [m["type"] for m in out] == ["capabilities", "epoch", "epoch", "result"]
        assert [m["epoch"] for m in out if m["type"] == "epoch"] == [0, 1]
        assert out[-1]["objective"] == pytest.approx(0.6)

    def test_epoch_indices_restart_per_request(self):
        out = drive(TraineeAdapter(fixed_curves), train_msg(epochs=2), train_msg(epochs=3))
        indices = [m["epoch"] for m in out if m["type"] == "epoch"]
        assert indices == [0, 1, 0, 1, 2]
        assert sum(m["type"] == "result" for m in out) == 2

    def test_assignment_and_seed_reach_the_callable(self):
        seen = {}

        def spy(assignment, directives, epochs, seed, emit_epoch):
            seen.update(assignment=assignment, directives=directives,
                        epochs=epochs, seed=seed)
            emit_epoch(1.0, 1.0, 0.5, 0.5)
            return FinalMetrics(1.0, 1.0, 0.5)

        assignment = {"conv1_units": 32, "fc_units": 384, "lr": 1e-3}
        drive(TraineeAdapter(spy), train_msg(assignment=assignment, seed=9,
                                             directives=("l2_regularization",)))
        assert seen["assignment"] == assignment
        assert seen["directives"] == ("l2_regularization",)
        assert seen["seed"] == 9

    def test_plain_tuple_accepted_as_final_metrics(self):
        def tuple_return(assignment, directives, epochs, seed, emit_epoch):
            emit_epoch(1.0, 1.0, 0.5, 0.5)
            return (0.25, 0.25, 0.9)

        out = drive(TraineeAdapter(tuple_return), train_msg(epochs=1))
        assert out[-1] == {"type": "result", "objective": 0.25,
                           "final_val_loss": 0.25, "final_val_acc": 0.9}

    def test_exception_becomes_error_message_and_loop_survives(self):
        calls = []

        def flaky(assignment, directives, epochs, seed, emit_epoch):
            calls.append(seed)
            if len(calls) == 1:
                raise RuntimeError("no GPU today")
            return fixed_curves(assignment, directives, epochs, seed, emit_epoch)

        out = drive(TraineeAdapter(flaky), train_msg(seed=1), train_msg(seed=2))
        kinds = [m["type"] for m in out]
        assert kinds == ["capabilities", "error", "epoch", "epoch", "result"]
        assert "no GPU today" in out[1]["message"]
        assert calls == [1, 2]

    def test_malformed_inbound_line_is_reported_not_fatal(self):
        stdin = io.StringIO("{nope\n" + json.dumps(train_msg(epochs=1)) + "\n")
        stdout = io.StringIO()
        serve(TraineeAdapter(fixed_curves), stdin, stdout)
        out = [json.loads(line) for line in stdout.getvalue().splitlines()]
        assert [m["type"] for m in out] == ["capabilities", "error", "epoch", "result"]

    @pytest.mark.parametrize("bad", [
        {"type": "train"},
        {"type": "train", "assignment": {}, "epochs": 0},
        {"type": "train", "assignment": {}, "epochs": 1, "seed": "x"},
        {"type": "ping"},
    ])
    def test_invalid_requests_are_rejected(self, bad):
        out = drive(TraineeAdapter(fixed_curves), bad)
        assert out[1]["type"] == "error"

    def test_nonfinite_metric_rejected_at_source(self):
        def nan_loss(assignment, directives, epochs, seed, emit_epoch):
            emit_epoch(float("nan"), 1.0, 0.5, 0.5)
            return FinalMetrics(1.0, 1.0, 0.5)

        out = drive(TraineeAdapter(nan_loss), train_msg())
        assert out[1]["type"] == "error"
        assert "train_loss" in out[1]["message"]

    def test_out_of_range_accuracy_rejected(self):
        def bad_acc(assignment, directives, epochs, seed, emit_epoch):
            emit_epoch(1.0, 1.0, 0.5, 1.5)
            return FinalMetrics(1.0, 1.0, 0.5)

        out = drive(TraineeAdapter(bad_acc), train_msg())
        assert out[1]["type"] == "error"
        assert "val_acc" in out[1]["message"]

    def test_zero_epoch_trainings_rejected(self):
        def silent(assignment, directives, epochs, seed, emit_epoch):
            return FinalMetrics(1.0, 1.0, 0.5)

        out = drive(TraineeAdapter(silent), train_msg())
        assert out[1]["type"] == "error"
        assert "no epoch records" in out[1]["message"]
