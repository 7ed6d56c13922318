"""Phenomenological training-curve simulator.

Generates loss/accuracy series from a closed-form model of how learning rate,
batch size, capacity and regularization shape real curves:

  - below the critical learning rate, validation loss decays as
    floor + (1 - floor)·exp(-e/τ) with τ shrinking as lr grows;
  - above it, loss climbs linearly with slope proportional to the excess;
  - batch size sets the amplitude of seeded pseudo-noise on the loss;
  - surplus capacity (units above what the task needs) opens a train/val
    accuracy gap, damped by dropout and collapsed by the L2 directive;
  - too little capacity raises the loss floor and caps accuracy.

Identical requests produce identical output. The model constants live in
SyntheticConfig so calibration tests can pin them and experiments can
override them.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..diagnosis import EvalResult, History
from ..rules import L2_REGULARIZATION
from .base import (
    Capabilities,
    OBJECTIVE_VAL_LOSS,
    TrainRequest,
    objective_from,
    role_value,
    role_values,
)

ROLE_LR = "learning_rate"
ROLE_BATCH = "batch_size"
ROLE_UNITS = "unit_count"
ROLE_DROPOUT = "dropout_rate"


@dataclass(frozen=True)
class SyntheticConfig:
    critical_lr: float = 0.1       # divergence threshold
    tau_base: float = 3.0          # decay constant (epochs) at the critical lr
    loss_floor: float = 0.10
    train_floor_ratio: float = 0.5
    rise_coeff: float = 2.0        # loss slope per epoch per unit of excess lr
    max_loss: float = 30.0
    min_loss: float = 0.01
    noise_coeff: float = 0.5       # oscillation amplitude = noise_coeff / batch_size
    capacity_need: float = 32.0    # units below this raise the floor, above open a gap
    underfit_loss_coeff: float = 0.85
    underfit_floor_cap: float = 0.95
    underfit_acc_drop: float = 0.5
    acc_chance: float = 0.10
    acc_cap: float = 0.97
    gap_coeff: float = 0.45
    gap_tau: float = 4.0
    l2_gap_factor: float = 0.2
    overfit_loss_rise: float = 1.0
    diverge_acc_start: float = 0.4
    diverge_acc_tau: float = 5.0


DEFAULT_SYNTHETIC = SyntheticConfig()


def synthetic_curves(
    req: TrainRequest,
    roles: dict,
    config: SyntheticConfig = DEFAULT_SYNTHETIC,
    objective_kind: str = OBJECTIVE_VAL_LOSS,
) -> tuple[History, EvalResult]:
    lr = float(role_value(roles, req.assignment, ROLE_LR))
    batch_size = float(role_value(roles, req.assignment, ROLE_BATCH))
    units = float(np.mean(role_values(roles, req.assignment, ROLE_UNITS)))
    dropout = float(np.mean(role_values(roles, req.assignment, ROLE_DROPOUT)))
    l2_active = L2_REGULARIZATION in req.directives

    c = config
    e = np.arange(req.epochs, dtype=float)
    rng = np.random.default_rng(req.seed)
    noise = (c.noise_coeff / max(batch_size, 1.0)) * rng.uniform(-1.0, 1.0, req.epochs)

    under = max(0.0, 1.0 - units / c.capacity_need)
    over = min(1.0, max(0.0, units - c.capacity_need) / c.capacity_need)
    gap_total = c.gap_coeff * over * (1.0 - dropout) * (c.l2_gap_factor if l2_active else 1.0)

    if lr > c.critical_lr:
        val_loss = 1.0 + c.rise_coeff * (lr - c.critical_lr) * e
        train_loss = 1.0 + 0.8 * c.rise_coeff * (lr - c.critical_lr) * e
        val_acc = c.acc_chance + (c.diverge_acc_start - c.acc_chance) * np.exp(-e / c.diverge_acc_tau)
        train_acc = val_acc.copy()
    else:
        tau = c.tau_base * np.sqrt(c.critical_lr / max(lr, 1e-12))
        floor = min(c.loss_floor + c.underfit_loss_coeff * under, c.underfit_floor_cap)
        gap = gap_total * (1.0 - np.exp(-e / c.gap_tau))
        val_loss = floor + (1.0 - floor) * np.exp(-e / tau) + c.overfit_loss_rise * gap
        train_floor = floor * c.train_floor_ratio
        train_loss = train_floor + (1.0 - train_floor) * np.exp(-e / tau)
        acc_cap = c.acc_cap - c.underfit_acc_drop * under
        progress = 1.0 - np.exp(-e / tau)
        val_acc = c.acc_chance + (acc_cap - gap_total - c.acc_chance) * progress
        train_acc = val_acc + gap

    val_loss = np.clip(val_loss + noise, c.min_loss, c.max_loss)
    train_loss = np.clip(train_loss, c.min_loss, c.max_loss)
    val_acc = np.clip(val_acc, 0.0, 1.0)
    train_acc = np.clip(train_acc, 0.0, 1.0)

    history = History(tuple(train_loss), tuple(val_loss), tuple(train_acc), tuple(val_acc))
    result = EvalResult(
        history.val_loss[-1],
        history.val_acc[-1],
        objective_from(objective_kind, history.val_loss[-1], history.val_acc[-1]),
    )
    return history, result


class SyntheticTrainee:
    """In-process trainee backed by the curve simulator."""

    def __init__(self, roles: dict, config: SyntheticConfig = DEFAULT_SYNTHETIC,
                 objective_kind: str = OBJECTIVE_VAL_LOSS):
        self.roles = roles
        self.config = config
        self.objective_kind = objective_kind
        self.capabilities = Capabilities(
            "synthetic-curves", ("l2_regularization", "batch_normalization")
        )

    def train(self, req: TrainRequest) -> tuple[History, EvalResult]:
        return synthetic_curves(req, self.roles, self.config, self.objective_kind)
