"""Adam, the training loop, and early stopping."""

import numpy as np
import pytest

from careercast.errors import ConfigError, NumericError
from careercast.nn import (
    Adam,
    BatchNorm,
    Dense,
    ReLU,
    Sequential,
    TrainConfig,
    mse_loss,
    train_loop,
)
from careercast.rng import substream


def test_adam_first_step_is_learning_rate_sized():
    rng = np.random.default_rng(0)
    param = rng.normal(size=(4, 3))
    grad = rng.normal(size=(4, 3))
    grad[np.abs(grad) < 0.01] = 0.5
    before = param.copy()
    opt = Adam(learning_rate=1e-3)
    opt.step([param], [grad])
    # bias-corrected first step: -lr * g / (|g| + tiny) ~= -lr * sign(g)
    assert np.allclose(param - before, -1e-3 * np.sign(grad), atol=1e-6)


def test_adam_zero_gradient_is_fixed_point():
    param = np.array([1.0, -2.0, 3.0])
    before = param.copy()
    opt = Adam()
    for _ in range(5):
        opt.step([param], [np.zeros(3)])
    assert np.array_equal(param, before)


def test_adam_rejects_non_finite_gradients():
    with pytest.raises(NumericError):
        Adam().step([np.zeros(2)], [np.array([1.0, np.nan])])


def make_linear_data(seed, n=64, p=3):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, p))
    w = np.array([2.0, -1.0, 0.5])
    y = x @ w[:, None] + 0.7
    return x, y


def test_training_fits_linear_data():
    x, y = make_linear_data(0)
    model = Sequential([Dense(3, 1, substream(0, "test.fit"))])
    config = TrainConfig(max_epochs=800, patience=800, seed=0, learning_rate=0.01)
    result = train_loop(model, x, y, config, rng=substream(0, "test.fit.train"))
    assert result.train_loss[-1] < 1e-3
    assert result.best_epoch <= result.stopped_epoch


def test_restored_parameters_reproduce_best_val_loss():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(50, 6))
    y = rng.normal(size=(50, 2))  # pure noise: val loss wanders, best is restored
    model = Sequential([Dense(6, 4, substream(1, "test.restore")), ReLU(), Dense(4, 2, substream(2, "test.restore"))])
    config = TrainConfig(max_epochs=40, patience=5, seed=1)
    result = train_loop(model, x, y, config, rng=substream(1, "test.restore.train"))

    probe = substream(1, "test.restore.train")
    order = probe.permutation(len(x))
    val_idx = order[: int(round(len(x) * config.validation_fraction))]
    val_loss, _ = mse_loss(model.forward(x[val_idx], train=False), y[val_idx])
    assert val_loss == pytest.approx(result.best_val_loss, abs=1e-12)
    assert result.best_val_loss == min(result.val_loss)
    assert result.best_epoch == result.val_loss.index(result.best_val_loss) + 1


def test_patience_one_stops_before_budget():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(40, 5))
    y = rng.normal(size=(40, 1))
    model = Sequential([Dense(5, 1, substream(3, "test.patience"))])
    # high learning rate so validation loss wobbles once it is near the optimum
    config = TrainConfig(max_epochs=200, patience=1, seed=2, learning_rate=0.05)
    result = train_loop(model, x, y, config, rng=substream(3, "test.patience.train"))
    assert result.stopped_epoch < 200
    assert result.best_epoch <= result.stopped_epoch
    assert result.stopped_epoch == result.best_epoch + 1


def test_training_is_deterministic():
    x, y = make_linear_data(3)

    def fit():
        model = Sequential([Dense(3, 2, substream(4, "test.det")), ReLU(), Dense(2, 1, substream(5, "test.det"))])
        train_loop(model, x, y, TrainConfig(max_epochs=15, seed=4), rng=substream(4, "test.det.train"))
        return [arr.copy() for _, arr in model.param_items()]

    first, second = fit(), fit()
    assert all(np.array_equal(a, b) for a, b in zip(first, second))


def test_trailing_singleton_batch_is_folded():
    # 37 samples -> 4 validation, 33 training rows against batch_size 32;
    # a naive split would feed batchnorm a 1-row batch and fail.
    rng = np.random.default_rng(5)
    x = rng.normal(size=(37, 4))
    y = rng.normal(size=(37, 1))
    model = Sequential([Dense(4, 6, substream(6, "test.fold")), BatchNorm(6), ReLU(), Dense(6, 1, substream(7, "test.fold"))])
    result = train_loop(model, x, y, TrainConfig(max_epochs=3, seed=5), rng=substream(6, "test.fold.train"))
    assert result.stopped_epoch >= 1


def test_train_loop_rejects_bad_shapes():
    x = np.zeros((10, 3))
    model = Sequential([Dense(3, 1)])
    with pytest.raises(ConfigError):
        train_loop(model, x, np.zeros((7, 1)), TrainConfig(seed=0))
    with pytest.raises(ConfigError):
        train_loop(model, x[:0], np.zeros((0, 1)), TrainConfig(seed=0))


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(max_epochs=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0).validate()
    with pytest.raises(ConfigError):
        TrainConfig(validation_fraction=1.5).validate()
    with pytest.raises(ConfigError):
        TrainConfig(learning_rate=0.0).validate()
    TrainConfig().validate()
