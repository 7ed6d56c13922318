import numpy as np
import pytest

from botune.errors import TrainingDiverged
from botune.trainees import TrainRequest, make_blobs, mlp_train
from botune.trainees.mlp import _fresh_running, init_params, loss_and_grads

ROLES = {
    "learning_rate": ["lr"],
    "batch_size": ["batch"],
    "unit_count": ["units1", "units2"],
    "dropout_rate": ["dropout"],
    "l2_coefficient": ["l2_lambda"],
}


def request(lr=0.05, batch=16, units1=16, units2=12, dropout=0.0,
            directives=(), epochs=5, seed=0, l2_lambda=None):
    assignment = {
        "lr": lr, "batch": batch, "units1": units1, "units2": units2, "dropout": dropout,
    }
    if l2_lambda is not None:
        assignment["l2_lambda"] = l2_lambda
    return TrainRequest(assignment, directives, epochs, seed)


def finite_difference(params, key, index, x, y, l2, bn, running, eps=1e-6):
    """Central finite difference of the batch loss along one coordinate."""
    flat = params[key].reshape(-1)
    orig = flat[index]
    flat[index] = orig + eps
    up, _ = loss_and_grads(params, x, y, l2, bn, dict(running), train=True)
    flat[index] = orig - eps
    down, _ = loss_and_grads(params, x, y, l2, bn, dict(running), train=True)
    flat[index] = orig
    return (up - down) / (2 * eps)


@pytest.mark.parametrize(
    "l2_lambda,batch_norm",
    [(0.0, False), (0.01, False), (0.0, True), (0.01, True)],
    ids=["plain", "l2", "batchnorm", "l2+batchnorm"],
)
def test_gradient_check(l2_lambda, batch_norm):
    rng = np.random.default_rng(42)
    x = rng.normal(size=(10, 4))
    y = rng.integers(0, 3, 10)
    params = init_params(4, [8, 6], 3, rng, batch_norm)
    running = _fresh_running(params)

    # checked coordinates: weights plus batch-norm scale/shift (bias gradients
    # vanish identically under batch norm, so relative error is meaningless there)
    keys = ["W1", "W2", "W3"] + (["g1", "beta1", "g2", "beta2"] if batch_norm else ["b1", "b2"])
    _, grads = loss_and_grads(params, x, y, l2_lambda, batch_norm, dict(running), train=True)
    for key in keys:
        size = params[key].size
        for index in rng.choice(size, size=min(5, size), replace=False):
            numeric = finite_difference(params, key, int(index), x, y,
                                        l2_lambda, batch_norm, running)
            analytic = grads[key].reshape(-1)[int(index)]
            denom = max(abs(numeric), abs(analytic), 1e-8)
            assert abs(numeric - analytic) / denom < 1e-4, (key, index)


def test_bias_gradient_vanishes_under_batch_norm():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(8, 4))
    y = rng.integers(0, 3, 8)
    params = init_params(4, [6, 5], 3, rng, True)
    _, grads = loss_and_grads(params, x, y, 0.0, True, None, train=True)
    assert np.allclose(grads["b1"], 0.0, atol=1e-12)
    assert np.allclose(grads["b2"], 0.0, atol=1e-12)


class TestTraining:
    def test_learns_separable_blobs(self):
        data = make_blobs(50, 3, 4, 1.0, seed=3)
        _, result = mlp_train(request(units1=24, units2=16, epochs=30, lr=0.05), data, ROLES)
        assert result.final_val_acc >= 0.9

    def test_epoch_budget(self):
        data = make_blobs(10, 2, 3, 0.5, seed=0)
        history, _ = mlp_train(request(epochs=1), data, ROLES)
        assert history.epochs == 1

    def test_deterministic(self):
        data = make_blobs(15, 2, 3, 0.8, seed=2)
        a = mlp_train(request(seed=7, dropout=0.3), data, ROLES)
        b = mlp_train(request(seed=7, dropout=0.3), data, ROLES)
        assert a == b

    def test_l2_at_vanishing_lambda_matches_plain(self):
        data = make_blobs(15, 2, 3, 0.8, seed=4)
        plain, _ = mlp_train(request(epochs=1), data, ROLES)
        tiny, _ = mlp_train(
            request(epochs=1, directives=("l2_regularization",), l2_lambda=1e-12),
            data, ROLES,
        )
        assert np.allclose(plain.train_loss, tiny.train_loss, atol=1e-6)
        assert np.allclose(plain.val_loss, tiny.val_loss, atol=1e-6)

    def test_batch_clamped_with_warning(self, caplog):
        data = make_blobs(5, 2, 3, 0.5, seed=5)
        with caplog.at_level("WARNING"):
            history, _ = mlp_train(request(batch=10_000, epochs=2), data, ROLES)
        assert "clamping" in caplog.text
        assert history.epochs == 2

    def test_divergence_raises_with_partial_history(self):
        data = make_blobs(20, 3, 4, 1.0, seed=6)
        with pytest.raises(TrainingDiverged) as exc_info:
            mlp_train(request(lr=1e4, epochs=30), data, ROLES)
        partial = exc_info.value.partial_history
        assert partial is None or partial.epochs < 30

    def test_batch_norm_directive_trains(self):
        data = make_blobs(30, 3, 4, 1.2, seed=7)
        history, result = mlp_train(
            request(epochs=20, directives=("batch_normalization",), batch=8),
            data, ROLES,
        )
        assert history.epochs == 20
        assert result.final_val_acc > 0.5

    def test_weight_trajectory_under_l2_converges_to_plain(self):
        # one epoch, lambda -> 0: final weights match the unregularized run
        data = make_blobs(10, 2, 3, 0.5, seed=8)
        rng_a = np.random.default_rng(11)
        rng_b = np.random.default_rng(11)
        x = data.features[data.train_idx]
        y = data.labels[data.train_idx]
        pa = init_params(x.shape[1], [8, 6], 2, rng_a, False)
        pb = init_params(x.shape[1], [8, 6], 2, rng_b, False)
        for params, lam, rng in ((pa, 0.0, rng_a), (pb, 1e-12, rng_b)):
            order = rng.permutation(len(x))
            for start in range(0, len(order), 4):
                idx = order[start:start + 4]
                _, grads = loss_and_grads(params, x[idx], y[idx], lam, False, None)
                for key, g in grads.items():
                    params[key] -= 0.05 * g
        max_diff = max(np.max(np.abs(pa[k] - pb[k])) for k in pa)
        assert max_diff < 1e-6
