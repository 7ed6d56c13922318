"""Adapter that serves a Python training function over trainee protocol v1.

The controller side speaks newline-delimited JSON: the trainee announces its
capabilities once, then answers each train request with one epoch record per
epoch and a single result record. serve() handles all of the framing and
sequencing; the user supplies a callable

    train(assignment, directives, epochs, seed, emit_epoch) -> FinalMetrics

that calls emit_epoch(train_loss, val_loss, train_acc, val_acc) once per
epoch (indices are assigned here, in call order, so they can never go out of
sequence or be dropped) and returns the final metrics. Every user-reported
number is validated before it goes on the wire, so a bad value fails loudly
at its source instead of poisoning the controller. Exceptions in the
callable, and malformed inbound messages, turn into protocol error messages;
the serving loop itself only ends at end-of-input.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass
from typing import Callable

PROTOCOL_VERSION = 1


@dataclass(frozen=True)
class FinalMetrics:
    objective: float
    final_val_loss: float
    final_val_acc: float


@dataclass(frozen=True)
class TraineeAdapter:
    train: Callable
    directives: tuple[str, ...] = ()
    name: str = "python-bridge"


def _check_real(label: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{label} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{label} must be finite, got {value!r}")
    return value


def _check_loss(label: str, value) -> float:
    value = _check_real(label, value)
    if value < 0:
        raise ValueError(f"{label} must be non-negative, got {value!r}")
    return value


def _check_acc(label: str, value) -> float:
    value = _check_real(label, value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{label} must be in [0, 1], got {value!r}")
    return value


class _Session:
    def __init__(self, out):
        self.out = out
        self.epoch = 0

    def send(self, message: dict) -> None:
        self.out.write(json.dumps(message) + "\n")
        self.out.flush()

    def emit_epoch(self, train_loss, val_loss, train_acc, val_acc) -> None:
        record = {
            "type": "epoch",
            "epoch": self.epoch,
            "train_loss": _check_loss("train_loss", train_loss),
            "val_loss": _check_loss("val_loss", val_loss),
            "train_acc": _check_acc("train_acc", train_acc),
            "val_acc": _check_acc("val_acc", val_acc),
        }
        self.send(record)
        self.epoch += 1


def _parse_train_request(message: dict):
    if message.get("type") != "train":
        raise ValueError(f"expected a train message, got {message.get('type')!r}")
    assignment = message.get("assignment")
    if not isinstance(assignment, dict):
        raise ValueError("train message needs an assignment object")
    directives = message.get("directives", [])
    if not isinstance(directives, list) or not all(isinstance(d, str) for d in directives):
        raise ValueError("directives must be a list of strings")
    epochs = message.get("epochs")
    if not isinstance(epochs, int) or isinstance(epochs, bool) or epochs < 1:
        raise ValueError(f"epochs must be a positive integer, got {epochs!r}")
    seed = message.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValueError(f"seed must be an integer, got {seed!r}")
    return assignment, tuple(directives), epochs, seed


def _handle_request(adapter: TraineeAdapter, session: _Session, message: dict) -> None:
    assignment, directives, epochs, seed = _parse_train_request(message)
    session.epoch = 0
    final = adapter.train(assignment, directives, epochs, seed, session.emit_epoch)
    if session.epoch == 0:
        raise ValueError("training function emitted no epoch records")
    if not isinstance(final, FinalMetrics):
        final = FinalMetrics(*final)
    session.send({
        "type": "result",
        "objective": _check_real("objective", final.objective),
        "final_val_loss": _check_loss("final_val_loss", final.final_val_loss),
        "final_val_acc": _check_acc("final_val_acc", final.final_val_acc),
    })


def serve(adapter: TraineeAdapter, stdin=None, stdout=None) -> None:
    """Announce capabilities, then answer train requests until end-of-input."""
    inp = stdin if stdin is not None else sys.stdin
    session = _Session(stdout if stdout is not None else sys.stdout)
    session.send({
        "type": "capabilities",
        "version": PROTOCOL_VERSION,
        "directives": list(adapter.directives),
        "name": adapter.name,
    })
    for line in inp:
        stripped = line.strip()
        if not stripped:
            continue
        try:
            message = json.loads(stripped)
            if not isinstance(message, dict):
                raise ValueError("message must be a JSON object")
            _handle_request(adapter, session, message)
        except Exception as exc:  # the loop must outlive any single training
            session.send({"type": "error", "message": f"{type(exc).__name__}: {exc}"})
