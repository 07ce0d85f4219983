"""Sequence model for the age 29-31 outlook.

An LSTM reads the seven normalized input rows in age order; its final
hidden state, optionally concatenated with a one-hot career-type
indicator, feeds a small dense head that emits the three target values
at once.
"""

from __future__ import annotations

import numpy as np

from . import rng as rngmod
from .clustering import one_hot
from .errors import ConfigError, ShapeError
from .nn import (
    LSTM,
    Dense,
    ReLU,
    Sequential,
    TrainConfig,
    TrainResult,
    layer_from_doc,
    layer_to_doc,
    train_loop,
)

N_HIDDEN = 64
N_OUTPUTS = 3


class Forecaster:
    """LSTM encoder plus dense head; ``k`` > 0 adds a one-hot cluster input."""

    def __init__(self, n_features: int, k: int = 0, rng: np.random.Generator | None = None):
        if k < 0:
            raise ConfigError(f"k must be non-negative, got {k}")
        self.n_features = int(n_features)
        self.k = int(k)
        self.n_hidden = N_HIDDEN
        self.lstm = LSTM(self.n_features, self.n_hidden, rng)
        # Cluster columns start at zero: a conditioned model begins as the
        # plain forecaster and learns per-cluster corrections on top, so the
        # two variants are directly comparable under a shared seed.
        base = Dense(self.n_hidden, 32, rng)
        first = Dense(self.n_hidden + self.k, 32)
        first.weight[:, : self.n_hidden] = base.weight
        self.head = Sequential(
            [
                first,
                ReLU(),
                Dense(32, 16, rng),
                ReLU(),
                Dense(16, N_OUTPUTS, rng),
            ]
        )

    def _split_inputs(self, inputs):
        if self.k > 0:
            if not isinstance(inputs, tuple) or len(inputs) != 2:
                raise ShapeError(
                    "a cluster-conditioned model takes (blocks, onehot) input pairs"
                )
            blocks, extras = inputs
        else:
            if isinstance(inputs, tuple):
                if len(inputs) != 1:
                    raise ShapeError(
                        "an unconditioned model takes blocks only, got a "
                        f"{len(inputs)}-tuple"
                    )
                blocks = inputs[0]
            else:
                blocks = inputs
            extras = None
        blocks = np.asarray(blocks, dtype=float)
        if blocks.ndim != 3 or blocks.shape[2] != self.n_features:
            raise ShapeError(
                f"expected (n, steps, {self.n_features}) blocks, got {blocks.shape}"
            )
        if extras is not None:
            extras = np.asarray(extras, dtype=float)
            if extras.shape != (blocks.shape[0], self.k):
                raise ShapeError(
                    f"expected ({blocks.shape[0]}, {self.k}) cluster indicators, "
                    f"got {extras.shape}"
                )
        return blocks, extras

    def forward(self, inputs, train: bool = False, rng=None) -> np.ndarray:
        blocks, extras = self._split_inputs(inputs)
        hidden = self.lstm.forward(blocks, train=train, rng=rng)
        if extras is not None:
            hidden = np.concatenate([hidden, extras], axis=1)
        return self.head.forward(hidden, train=train, rng=rng)

    def backward(self, grad_out: np.ndarray):
        grad_hidden = self.head.backward(grad_out)
        # the one-hot block receives no gradient; peel off the LSTM part
        self.lstm.backward(grad_hidden[:, : self.n_hidden])
        return None

    def param_items(self):
        items = [("lstm." + n, p) for n, p in self.lstm.param_items()]
        items += [("head." + n, p) for n, p in self.head.param_items()]
        return items

    def grad_items(self):
        items = [("lstm." + n, g) for n, g in self.lstm.grad_items()]
        items += [("head." + n, g) for n, g in self.head.grad_items()]
        return items

    def state_items(self):
        items = [("lstm." + n, s) for n, s in self.lstm.state_items()]
        items += [("head." + n, s) for n, s in self.head.state_items()]
        return items

    def predict_batch(self, blocks: np.ndarray, assignments=None) -> np.ndarray:
        """Inference on (n, steps, n_features) blocks; assignments required if k > 0."""
        if self.k > 0:
            if assignments is None:
                raise ConfigError(
                    "this model is cluster-conditioned; pass cluster assignments"
                )
            inputs = (blocks, one_hot(np.asarray(assignments), self.k))
        else:
            if assignments is not None:
                raise ConfigError("this model takes no cluster assignments")
            inputs = blocks
        return self.forward(inputs, train=False)

    def predict(self, block: np.ndarray, cluster: int | None = None) -> np.ndarray:
        """Inference on a single (steps, n_features) block."""
        block = np.asarray(block, dtype=float)
        if block.ndim != 2:
            raise ShapeError(f"expected a 2-d block, got shape {block.shape}")
        assignments = None if cluster is None else np.array([cluster])
        return self.predict_batch(block[None, :, :], assignments)[0]

    def to_doc(self) -> dict:
        return {
            "n_features": self.n_features,
            "k": self.k,
            "lstm": layer_to_doc(self.lstm),
            "head": layer_to_doc(self.head),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Forecaster":
        model = cls(doc["n_features"], k=doc["k"])
        model.lstm = layer_from_doc(doc["lstm"])
        model.head = layer_from_doc(doc["head"])
        return model


def forecaster_train(
    blocks: np.ndarray,
    targets: np.ndarray,
    assignments=None,
    k: int = 0,
    seed: int = 0,
    config: TrainConfig | None = None,
) -> tuple[Forecaster, TrainResult]:
    """Fit a forecaster; with ``k`` > 0 each row also carries its cluster id."""
    blocks = np.asarray(blocks, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if blocks.ndim != 3:
        raise ShapeError(f"expected (n, steps, features) blocks, got {blocks.shape}")
    if targets.shape != (blocks.shape[0], N_OUTPUTS):
        raise ShapeError(
            f"expected ({blocks.shape[0]}, {N_OUTPUTS}) targets, got {targets.shape}"
        )
    if k > 0:
        if assignments is None:
            raise ConfigError("k > 0 requires cluster assignments for every row")
        indicator = one_hot(np.asarray(assignments), k)
        if indicator.shape[0] != blocks.shape[0]:
            raise ShapeError(
                f"{indicator.shape[0]} assignments for {blocks.shape[0]} rows"
            )
        inputs = (blocks, indicator)
    else:
        if assignments is not None:
            raise ConfigError("assignments were given but k is 0")
        inputs = blocks
    if config is None:
        config = TrainConfig(seed=seed)
    model = Forecaster(
        blocks.shape[2], k=k, rng=rngmod.substream(seed, "forecaster.init")
    )
    result = train_loop(
        model,
        inputs,
        targets,
        config,
        rng=rngmod.substream(seed, "forecaster.train"),
    )
    return model, result
