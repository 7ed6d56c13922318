"""Client side of trainee wire protocol v1.

Newline-delimited JSON over the trainee process's stdin/stdout:

  trainee -> controller   {"type":"capabilities","version":1,"directives":[...],"name":...}
  controller -> trainee   {"type":"train","assignment":{...},"directives":[...],"epochs":E,"seed":S}
  trainee -> controller   {"type":"epoch","epoch":i,"train_loss":..,"val_loss":..,
                           "train_acc":..,"val_acc":..}        (one per epoch, from 0)
  trainee -> controller   {"type":"result","objective":..,"final_val_loss":..,"final_val_acc":..}
  either direction        {"type":"error","message":..}

All reals must be finite, epoch indices strictly increase from 0, and exactly
one result message terminates a training. Requested directives the trainee
did not declare are dropped from the request and logged, not treated as a
failure.
"""
from __future__ import annotations

import json
import logging
import math
import queue
import subprocess
import threading
import time

from ..diagnosis import EvalResult, History
from ..errors import ProtocolError, TraineeCrashed, TraineeTimeout
from .base import Capabilities, PROTOCOL_VERSION, TrainRequest

log = logging.getLogger(__name__)


def _require_finite_real(message, key, line_no):
    value = message.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
        raise ProtocolError(f"{key} must be a finite number, got {value!r}", line_no)
    return float(value)


def parse_capabilities(message: dict, line_no: int) -> Capabilities:
    version = message.get("version")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {version!r}", line_no)
    directives = message.get("directives", [])
    if not isinstance(directives, list) or not all(isinstance(d, str) for d in directives):
        raise ProtocolError(f"directives must be a list of strings, got {directives!r}", line_no)
    return Capabilities(str(message.get("name", "")), tuple(directives), version)


def parse_epoch(message: dict, expected_epoch: int, line_no: int) -> dict:
    epoch = message.get("epoch")
    if epoch != expected_epoch:
        raise ProtocolError(f"epoch {epoch!r}, expected {expected_epoch}", line_no)
    record = {}
    for key in ("train_loss", "val_loss", "train_acc", "val_acc"):
        record[key] = _require_finite_real(message, key, line_no)
    for key in ("train_loss", "val_loss"):
        if record[key] < 0:
            raise ProtocolError(f"{key} must be non-negative, got {record[key]}", line_no)
    for key in ("train_acc", "val_acc"):
        if not 0.0 <= record[key] <= 1.0:
            raise ProtocolError(f"{key} must be in [0, 1], got {record[key]}", line_no)
    return record


def parse_result(message: dict, line_no: int) -> EvalResult:
    return EvalResult(
        _require_finite_real(message, "final_val_loss", line_no),
        _require_finite_real(message, "final_val_acc", line_no),
        _require_finite_real(message, "objective", line_no),
    )


def train_message(req: TrainRequest) -> dict:
    return {
        "type": "train",
        "assignment": dict(req.assignment),
        "directives": list(req.directives),
        "epochs": req.epochs,
        "seed": req.seed,
    }


class _LineReader:
    """Pulls stdout lines on a thread so reads can honor a deadline."""

    def __init__(self, stream):
        self._queue: queue.Queue = queue.Queue()
        self._thread = threading.Thread(target=self._pump, args=(stream,), daemon=True)
        self._thread.start()

    def _pump(self, stream):
        for line in stream:
            self._queue.put(line)
        self._queue.put(None)  # EOF marker

    def next_line(self, deadline: float):
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise TimeoutError
        try:
            return self._queue.get(timeout=remaining)
        except queue.Empty:
            raise TimeoutError from None


def run_external_trainee(command, req: TrainRequest, timeout_s: float = 300.0):
    """Run one training in a subprocess speaking protocol v1.

    Returns (History, EvalResult); raises TraineeTimeout, TraineeCrashed, or
    ProtocolError (with the offending line number) as appropriate.
    """
    proc = subprocess.Popen(
        command,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    deadline = time.monotonic() + timeout_s
    try:
        return _converse(proc, req, deadline)
    except TimeoutError:
        proc.kill()
        proc.wait()
        raise TraineeTimeout(f"no response within {timeout_s}s") from None
    except Exception:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
        raise
    finally:
        if proc.poll() is None:
            try:
                proc.stdin.close()
            except OSError:
                pass
            try:
                proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                proc.kill()
                proc.wait()


def _converse(proc, req: TrainRequest, deadline: float):
    reader = _LineReader(proc.stdout)
    line_no = 0

    def next_message():
        nonlocal line_no
        while True:
            line = reader.next_line(deadline)
            if line is None:
                code = proc.wait()
                if code != 0:
                    raise TraineeCrashed(f"exit status {code} before result")
                raise ProtocolError("stream ended before result", line_no)
            line_no += 1
            stripped = line.strip()
            if not stripped:
                continue
            try:
                message = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ProtocolError(f"invalid JSON ({exc.msg})", line_no) from None
            if not isinstance(message, dict) or "type" not in message:
                raise ProtocolError("message must be an object with a 'type'", line_no)
            if message["type"] == "error":
                raise TraineeCrashed(f"trainee error: {message.get('message')}")
            return message

    message = next_message()
    if message["type"] != "capabilities":
        raise ProtocolError(f"expected capabilities, got {message['type']!r}", line_no)
    capabilities = parse_capabilities(message, line_no)

    supported = tuple(d for d in req.directives if d in capabilities.directives)
    dropped = tuple(d for d in req.directives if d not in capabilities.directives)
    if dropped:
        log.warning(
            "trainee %s does not support %s; downgrading request",
            capabilities.name, ", ".join(dropped),
        )
    effective = TrainRequest(req.assignment, supported, req.epochs, req.seed)

    proc.stdin.write(json.dumps(train_message(effective)) + "\n")
    proc.stdin.flush()

    epochs = []
    while True:
        message = next_message()
        if message["type"] == "epoch":
            epochs.append(parse_epoch(message, len(epochs), line_no))
        elif message["type"] == "result":
            result = parse_result(message, line_no)
            break
        else:
            raise ProtocolError(f"unexpected message type {message['type']!r}", line_no)

    if not epochs:
        raise ProtocolError("no epoch records before result", line_no)
    history = History(
        tuple(e["train_loss"] for e in epochs),
        tuple(e["val_loss"] for e in epochs),
        tuple(e["train_acc"] for e in epochs),
        tuple(e["val_acc"] for e in epochs),
    )
    return history, result


class ExternalTrainee:
    """Controller-side handle spawning one subprocess per training."""

    def __init__(self, command, timeout_s: float = 300.0):
        self.command = list(command)
        self.timeout_s = timeout_s

    def train(self, req: TrainRequest):
        return run_external_trainee(self.command, req, self.timeout_s)
