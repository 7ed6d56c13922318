"""From-scratch MLP trainee: two ReLU hidden layers, softmax output,
mini-batch SGD, optional L2 penalty, batch normalization and dropout.

The seed drives initialization, shuffling and dropout masks, so a request is
reproducible bit for bit. Losses reported in the history are plain
cross-entropy for both phases; the L2 penalty only shapes the gradients.
"""
from __future__ import annotations

import logging

import numpy as np

from ..diagnosis import EvalResult, History
from ..errors import TrainingDiverged
from ..rules import BATCH_NORMALIZATION, L2_REGULARIZATION
from .base import (
    Capabilities,
    OBJECTIVE_VAL_LOSS,
    TrainRequest,
    objective_from,
    role_value,
    role_values,
)
from .data import Dataset
from .synthetic import ROLE_BATCH, ROLE_DROPOUT, ROLE_LR, ROLE_UNITS

log = logging.getLogger(__name__)

_BN_EPS = 1e-5
_BN_MOMENTUM = 0.9
ROLE_L2 = "l2_coefficient"


def init_params(n_features, hidden, n_classes, rng, batch_norm):
    sizes = [n_features, hidden[0], hidden[1], n_classes]
    params = {}
    for i in range(3):
        params[f"W{i+1}"] = rng.normal(0.0, np.sqrt(2.0 / sizes[i]), (sizes[i], sizes[i + 1]))
        params[f"b{i+1}"] = np.zeros(sizes[i + 1])
    if batch_norm:
        for i in (1, 2):
            params[f"g{i}"] = np.ones(sizes[i])
            params[f"beta{i}"] = np.zeros(sizes[i])
    return params


def _bn_forward(z, gamma, beta, running, layer, train):
    if train:
        mu = z.mean(axis=0)
        var = z.var(axis=0)
        running[f"mean{layer}"] = _BN_MOMENTUM * running[f"mean{layer}"] + (1 - _BN_MOMENTUM) * mu
        running[f"var{layer}"] = _BN_MOMENTUM * running[f"var{layer}"] + (1 - _BN_MOMENTUM) * var
    else:
        mu = running[f"mean{layer}"]
        var = running[f"var{layer}"]
    inv_std = 1.0 / np.sqrt(var + _BN_EPS)
    z_hat = (z - mu) * inv_std
    return gamma * z_hat + beta, (z_hat, inv_std)


def _bn_backward(d_out, gamma, cache):
    z_hat, inv_std = cache
    n = z_hat.shape[0]
    d_gamma = np.sum(d_out * z_hat, axis=0)
    d_beta = np.sum(d_out, axis=0)
    d_zhat = d_out * gamma
    d_z = (inv_std / n) * (
        n * d_zhat - np.sum(d_zhat, axis=0) - z_hat * np.sum(d_zhat * z_hat, axis=0)
    )
    return d_z, d_gamma, d_beta


def _log_softmax(z):
    shifted = z - z.max(axis=1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))


def loss_and_grads(params, x, y, l2_lambda=0.0, batch_norm=False, running=None,
                   train=True, dropout_rate=0.0, dropout_rng=None):
    """Cross-entropy (+ L2 penalty) and analytic gradients for one batch."""
    n = x.shape[0]
    running = running if running is not None else _fresh_running(params)
    caches = {}
    a = x
    for i in (1, 2):
        z = a @ params[f"W{i}"] + params[f"b{i}"]
        if batch_norm:
            z, caches[f"bn{i}"] = _bn_forward(
                z, params[f"g{i}"], params[f"beta{i}"], running, i, train
            )
        relu_mask = z > 0
        h = z * relu_mask
        if train and dropout_rate > 0.0 and dropout_rng is not None:
            keep = 1.0 - dropout_rate
            drop_mask = (dropout_rng.random(h.shape) < keep) / keep
            h = h * drop_mask
        else:
            drop_mask = None
        caches[i] = (a, relu_mask, drop_mask)
        a = h
    z3 = a @ params["W3"] + params["b3"]
    log_probs = _log_softmax(z3)
    loss = -float(np.mean(log_probs[np.arange(n), y]))
    if l2_lambda:
        loss += l2_lambda * sum(float(np.sum(params[f"W{i}"] ** 2)) for i in (1, 2, 3))

    probs = np.exp(log_probs)
    d_z3 = probs.copy()
    d_z3[np.arange(n), y] -= 1.0
    d_z3 /= n

    grads = {
        "W3": a.T @ d_z3 + 2.0 * l2_lambda * params["W3"],
        "b3": d_z3.sum(axis=0),
    }
    d_h = d_z3 @ params["W3"].T
    for i in (2, 1):
        a_prev, relu_mask, drop_mask = caches[i]
        if drop_mask is not None:
            d_h = d_h * drop_mask
        d_z = d_h * relu_mask
        if batch_norm:
            d_z, d_gamma, d_beta = _bn_backward(d_z, params[f"g{i}"], caches[f"bn{i}"])
            grads[f"g{i}"] = d_gamma
            grads[f"beta{i}"] = d_beta
        grads[f"W{i}"] = a_prev.T @ d_z + 2.0 * l2_lambda * params[f"W{i}"]
        grads[f"b{i}"] = d_z.sum(axis=0)
        if i == 2:
            d_h = d_z @ params["W2"].T
    return loss, grads


def _fresh_running(params):
    running = {}
    for i in (1, 2):
        width = params[f"W{i}"].shape[1]
        running[f"mean{i}"] = np.zeros(width)
        running[f"var{i}"] = np.ones(width)
    return running


def _evaluate(params, x, y, batch_norm, running):
    z = x
    for i in (1, 2):
        z = z @ params[f"W{i}"] + params[f"b{i}"]
        if batch_norm:
            inv_std = 1.0 / np.sqrt(running[f"var{i}"] + _BN_EPS)
            z = params[f"g{i}"] * (z - running[f"mean{i}"]) * inv_std + params[f"beta{i}"]
        z = np.maximum(z, 0.0)
    logits = z @ params["W3"] + params["b3"]
    log_probs = _log_softmax(logits)
    loss = -float(np.mean(log_probs[np.arange(len(y)), y]))
    acc = float(np.mean(np.argmax(logits, axis=1) == y))
    return loss, acc


def _hidden_sizes(roles, assignment):
    units = [int(v) for v in role_values(roles, assignment, ROLE_UNITS)]
    if len(units) == 1:
        return [units[0], units[0]]
    return units[:2]


def mlp_train(req: TrainRequest, data: Dataset, roles: dict,
              objective_kind: str = OBJECTIVE_VAL_LOSS) -> tuple[History, EvalResult]:
    lr = float(role_value(roles, req.assignment, ROLE_LR))
    batch_size = int(role_value(roles, req.assignment, ROLE_BATCH))
    dropout = float(np.mean(role_values(roles, req.assignment, ROLE_DROPOUT)))
    hidden = _hidden_sizes(roles, req.assignment)

    l2_active = L2_REGULARIZATION in req.directives
    bn_active = BATCH_NORMALIZATION in req.directives
    l2_lambda = (
        float(role_value(roles, req.assignment, ROLE_L2, fallback="l2_lambda"))
        if l2_active else 0.0
    )

    x_train = data.features[data.train_idx]
    y_train = data.labels[data.train_idx]
    x_val = data.features[data.val_idx]
    y_val = data.labels[data.val_idx]
    if batch_size > len(x_train):
        log.warning("batch size %d exceeds training set %d; clamping", batch_size, len(x_train))
        batch_size = len(x_train)

    rng = np.random.default_rng(req.seed)
    params = init_params(x_train.shape[1], hidden, data.n_classes, rng, bn_active)
    running = _fresh_running(params)

    series = {"train_loss": [], "val_loss": [], "train_acc": [], "val_acc": []}
    with np.errstate(over="ignore", invalid="ignore"):  # divergence is detected, not warned
        for epoch in range(req.epochs):
            order = rng.permutation(len(x_train))
            for start in range(0, len(order), batch_size):
                batch = order[start:start + batch_size]
                loss, grads = loss_and_grads(
                    params, x_train[batch], y_train[batch], l2_lambda, bn_active,
                    running, train=True, dropout_rate=dropout, dropout_rng=rng,
                )
                if not np.isfinite(loss):
                    raise TrainingDiverged(
                        f"non-finite loss at epoch {epoch}", _partial_history(series)
                    )
                for key, grad in grads.items():
                    params[key] -= lr * grad
            train_loss, train_acc = _evaluate(params, x_train, y_train, bn_active, running)
            val_loss, val_acc = _evaluate(params, x_val, y_val, bn_active, running)
            if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
                raise TrainingDiverged(
                    f"non-finite evaluation loss at epoch {epoch}", _partial_history(series)
                )
            series["train_loss"].append(max(train_loss, 0.0))
            series["val_loss"].append(max(val_loss, 0.0))
            series["train_acc"].append(train_acc)
            series["val_acc"].append(val_acc)

    history = History(
        tuple(series["train_loss"]), tuple(series["val_loss"]),
        tuple(series["train_acc"]), tuple(series["val_acc"]),
    )
    result = EvalResult(
        history.val_loss[-1], history.val_acc[-1],
        objective_from(objective_kind, history.val_loss[-1], history.val_acc[-1]),
    )
    return history, result


def _partial_history(series) -> History | None:
    if not series["train_loss"]:
        return None
    return History(
        tuple(series["train_loss"]), tuple(series["val_loss"]),
        tuple(series["train_acc"]), tuple(series["val_acc"]),
    )


class MlpTrainee:
    """In-process trainee that fits the MLP on a fixed dataset."""

    def __init__(self, data: Dataset, roles: dict, objective_kind: str = OBJECTIVE_VAL_LOSS):
        self.data = data
        self.roles = roles
        self.objective_kind = objective_kind
        self.capabilities = Capabilities(
            "mlp-blobs", (L2_REGULARIZATION, BATCH_NORMALIZATION)
        )

    def train(self, req: TrainRequest) -> tuple[History, EvalResult]:
        return mlp_train(req, self.data, self.roles, self.objective_kind)
