"""Seeded mini-batch training with validation-based early stopping."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..rng import substream
from .losses import mse_loss
from .optim import Adam


@dataclass
class TrainConfig:
    max_epochs: int = 100
    batch_size: int = 32
    patience: int = 10
    validation_fraction: float = 0.1
    learning_rate: float = 1e-3
    seed: int = 0

    def validate(self):
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.patience < 1:
            raise ConfigError(f"patience must be >= 1, got {self.patience}")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError(
                f"validation_fraction must be in (0, 1), got {self.validation_fraction}"
            )
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")


@dataclass
class TrainResult:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    stopped_epoch: int = 0
    best_epoch: int = 0
    best_val_loss: float = float("inf")


def _take(inputs, idx):
    if isinstance(inputs, tuple):
        return tuple(a[idx] for a in inputs)
    return inputs[idx]


def _n_samples(inputs):
    if isinstance(inputs, tuple):
        return len(inputs[0])
    return len(inputs)


def _batch_bounds(n: int, batch_size: int) -> list[tuple[int, int]]:
    bounds = [(lo, min(lo + batch_size, n)) for lo in range(0, n, batch_size)]
    # A trailing batch of one breaks train-mode batchnorm; fold it into the
    # previous batch instead of dropping the sample.
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] == 1:
        lo, _ = bounds[-2]
        bounds[-2:] = [(lo, n)]
    return bounds


def train_loop(model, inputs, targets, config: TrainConfig, rng=None) -> TrainResult:
    """Train ``model`` on (inputs, targets) and restore its best weights.

    ``inputs`` is an array or a tuple of arrays sliced along axis 0 in
    parallel (the conditioned forecaster passes a (sequences, one-hots)
    pair). A ``validation_fraction`` slice is held out up front; training
    stops once validation loss has not improved for ``patience`` epochs or
    at ``max_epochs``, whichever comes first, and the parameters from the
    best validation epoch are restored. Fully deterministic given the seed.
    """
    config.validate()
    if rng is None:
        rng = substream(config.seed, "train_loop")
    n = _n_samples(inputs)
    if n == 0:
        raise ConfigError("no training data")
    targets = np.asarray(targets, dtype=float)
    if len(targets) != n:
        raise ConfigError(f"{n} inputs but {len(targets)} targets")

    n_val = int(round(n * config.validation_fraction))
    if n_val < 1:
        raise ConfigError(
            f"validation slice is empty: {n} samples at fraction "
            f"{config.validation_fraction}"
        )
    if n - n_val < 1:
        raise ConfigError("validation slice leaves no training samples")
    order = rng.permutation(n)
    val_idx = order[:n_val]
    train_idx = order[n_val:]
    val_inputs = _take(inputs, val_idx)
    val_targets = targets[val_idx]

    optimizer = Adam(learning_rate=config.learning_rate)
    params = [arr for _, arr in model.param_items()]
    result = TrainResult()
    best_snapshot = None
    epochs_without_improvement = 0

    for epoch in range(1, config.max_epochs + 1):
        epoch_order = train_idx[rng.permutation(train_idx.size)]
        total = 0.0
        for lo, hi in _batch_bounds(train_idx.size, config.batch_size):
            batch_idx = epoch_order[lo:hi]
            pred = model.forward(_take(inputs, batch_idx), train=True, rng=rng)
            loss, grad = mse_loss(pred, targets[batch_idx])
            model.backward(grad)
            optimizer.step(params, [g for _, g in model.grad_items()])
            total += loss * batch_idx.size
        result.train_loss.append(total / train_idx.size)

        val_pred = model.forward(val_inputs, train=False)
        val_loss, _ = mse_loss(val_pred, val_targets)
        result.val_loss.append(val_loss)
        result.stopped_epoch = epoch

        if val_loss < result.best_val_loss:
            result.best_val_loss = val_loss
            result.best_epoch = epoch
            best_snapshot = _snapshot(model)
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1
            if epochs_without_improvement >= config.patience:
                break

    _restore(model, best_snapshot)
    return result


def _snapshot(model):
    return [
        arr.copy()
        for _, arr in (*model.param_items(), *model.state_items())
    ]


def _restore(model, snapshot):
    if snapshot is None:
        return
    live = [arr for _, arr in (*model.param_items(), *model.state_items())]
    for dst, src in zip(live, snapshot):
        np.copyto(dst, src)
