"""Training-curve diagnosis.

Classifies one training run into zero or more issues by comparing tail
statistics of the loss/accuracy series against configurable thresholds:

  overfitting           train/val accuracy gap with val loss above train loss
  underfitting          training loss still high and training accuracy low
  fluctuating loss      validation loss keeps changing direction
  increasing loss trend validation loss sloping up and clearly above its minimum

Tail windows rather than final-epoch values keep single-epoch noise from
flipping verdicts. Overfitting and underfitting are mutually exclusive in a
report; everything here is pure and deterministic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyHistory, InsufficientHistory


class IssueKind(str, enum.Enum):
    OVERFITTING = "overfitting"
    UNDERFITTING = "underfitting"
    FLUCTUATING_LOSS = "fluctuating_loss"
    INCREASING_LOSS_TREND = "increasing_loss_trend"


@dataclass(frozen=True)
class Issue:
    kind: IssueKind
    score: float


@dataclass(frozen=True)
class History:
    """Per-epoch train/validation loss and accuracy series of equal length."""

    train_loss: tuple[float, ...]
    val_loss: tuple[float, ...]
    train_acc: tuple[float, ...]
    val_acc: tuple[float, ...]

    def __post_init__(self):
        for name in ("train_loss", "val_loss", "train_acc", "val_acc"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        lengths = {len(self.train_loss), len(self.val_loss), len(self.train_acc), len(self.val_acc)}
        if lengths == {0}:
            raise EmptyHistory("history has no epochs")
        if len(lengths) != 1:
            raise ValueError(f"series lengths differ: {sorted(lengths)}")
        for series in (self.train_loss, self.val_loss):
            if any(not math.isfinite(v) or v < 0 for v in series):
                raise ValueError("losses must be finite and non-negative")
        for series in (self.train_acc, self.val_acc):
            if any(not math.isfinite(v) or not 0 <= v <= 1 for v in series):
                raise ValueError("accuracies must lie in [0, 1]")

    @property
    def epochs(self) -> int:
        return len(self.train_loss)


@dataclass(frozen=True)
class EvalResult:
    final_val_loss: float
    final_val_acc: float
    objective: float

    def __post_init__(self):
        if not math.isfinite(self.objective):
            raise ValueError(f"objective must be finite, got {self.objective}")


@dataclass(frozen=True)
class DiagnosisThresholds:
    overfit_gap: float = 0.10
    underfit_loss: float = 1.0
    underfit_acc: float = 0.6
    noise_score: float = 0.25
    trend_min_rel_rise: float = 0.05
    tail_fraction: float = 0.25

    def __post_init__(self):
        for name in ("overfit_gap", "underfit_loss", "underfit_acc", "noise_score",
                     "trend_min_rel_rise", "tail_fraction"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.tail_fraction > 1:
            raise ValueError("tail_fraction must be <= 1")


DiagnosisReport = tuple


def tail_mean(series, tail_fraction: float) -> float:
    """Mean of the last ceil(E·tail_fraction) entries."""
    vals = list(series)
    if not vals:
        raise EmptyHistory("empty series")
    window = math.ceil(len(vals) * tail_fraction)
    return float(np.mean(vals[-window:]))


def oscillation_score(loss) -> float:
    """Fraction of consecutive first-difference pairs whose sign flips.

    Zero differences count as no flip; ranges over [0, 1].
    """
    vals = np.asarray(list(loss), dtype=float)
    if len(vals) < 3:
        raise InsufficientHistory(f"need >= 3 entries, got {len(vals)}")
    diffs = np.diff(vals)
    flips = np.sum(diffs[:-1] * diffs[1:] < 0)
    return float(flips) / (len(vals) - 2)


def loss_slope(loss, tail_fraction: float) -> float:
    """Least-squares slope (per epoch) over the tail window."""
    vals = list(loss)
    window = math.ceil(len(vals) * tail_fraction) if vals else 0
    if window < 2:
        raise InsufficientHistory(f"tail window {window} < 2")
    tail = np.asarray(vals[-window:], dtype=float)
    x = np.arange(window, dtype=float)
    x_c = x - x.mean()
    return float(np.dot(x_c, tail - tail.mean()) / np.dot(x_c, x_c))


def detect_overfitting(h: History, t: DiagnosisThresholds) -> Issue | None:
    gap = tail_mean(h.train_acc, t.tail_fraction) - tail_mean(h.val_acc, t.tail_fraction)
    loss_inverted = tail_mean(h.val_loss, t.tail_fraction) > tail_mean(h.train_loss, t.tail_fraction)
    if gap > t.overfit_gap and loss_inverted:
        return Issue(IssueKind.OVERFITTING, gap)
    return None


def detect_underfitting(h: History, r: EvalResult, t: DiagnosisThresholds) -> Issue | None:
    train_loss = tail_mean(h.train_loss, t.tail_fraction)
    train_acc = tail_mean(h.train_acc, t.tail_fraction)
    if train_loss > t.underfit_loss and train_acc < t.underfit_acc:
        return Issue(IssueKind.UNDERFITTING, train_loss)
    return None


def _detect_trend(h: History, t: DiagnosisThresholds) -> Issue | None:
    if h.epochs < 2:
        return None
    # widen the tail to the minimum two points a slope needs on short runs
    fraction = max(t.tail_fraction, 2.0 / h.epochs)
    slope = loss_slope(h.val_loss, fraction)
    floor = min(h.val_loss)
    if slope > 0 and tail_mean(h.val_loss, t.tail_fraction) > (1 + t.trend_min_rel_rise) * floor:
        return Issue(IssueKind.INCREASING_LOSS_TREND, slope)
    return None


def _detect_fluctuation(h: History, t: DiagnosisThresholds) -> Issue | None:
    if h.epochs < 3:
        return None
    score = oscillation_score(h.val_loss)
    if score > t.noise_score:
        return Issue(IssueKind.FLUCTUATING_LOSS, score)
    return None


def diagnose(h: History, r: EvalResult, t: DiagnosisThresholds | None = None) -> DiagnosisReport:
    """Run all detectors; report order is fixed and the first two are exclusive."""
    t = t or DiagnosisThresholds()
    report = []
    overfit = detect_overfitting(h, t)
    if overfit is not None:
        report.append(overfit)
    else:
        underfit = detect_underfitting(h, r, t)
        if underfit is not None:
            report.append(underfit)
    trend = _detect_trend(h, t)
    if trend is not None:
        report.append(trend)
    noisy = _detect_fluctuation(h, t)
    if noisy is not None:
        report.append(noisy)
    return tuple(report)
