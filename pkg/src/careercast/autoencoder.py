"""Career-shape embedding via a dense autoencoder.

A player's normalized input block (ages 22 through 28, one row per age)
is flattened age-major and squeezed through a bottleneck; the bottleneck
activations are the embedding that downstream clustering consumes.
"""

from __future__ import annotations

import numpy as np

from . import rng as rngmod
from .errors import ShapeError
from .nn import (
    BatchNorm,
    Dense,
    Dropout,
    ReLU,
    Sequential,
    TrainConfig,
    TrainResult,
    layer_from_doc,
    layer_to_doc,
    train_loop,
)

DEFAULT_HIDDEN = 128
DEFAULT_CODE = 64
DEFAULT_DROPOUT = 0.1


def flatten_sequence(matrix: np.ndarray) -> np.ndarray:
    """Flatten one (n_ages, n_features) block to a vector, age-major."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ShapeError(f"expected a 2-d block, got shape {matrix.shape}")
    return matrix.ravel()


def flatten_batch(blocks: np.ndarray) -> np.ndarray:
    """Flatten a (n_players, n_ages, n_features) stack to (n_players, n_ages*n_features)."""
    blocks = np.asarray(blocks, dtype=float)
    if blocks.ndim != 3:
        raise ShapeError(f"expected a 3-d stack, got shape {blocks.shape}")
    return blocks.reshape(blocks.shape[0], -1)


class Autoencoder:
    """Bottleneck reconstruction net whose encoder half doubles as an embedder.

    The encoder runs input -> hidden (batch norm, dropout, relu) -> code
    (relu); the decoder mirrors it back with a linear output. ``encoder``
    and ``model`` share layer objects, so training the full net trains
    the embedder in place.
    """

    def __init__(
        self,
        n_inputs: int,
        n_hidden: int = DEFAULT_HIDDEN,
        n_code: int = DEFAULT_CODE,
        dropout_rate: float = DEFAULT_DROPOUT,
        rng: np.random.Generator | None = None,
    ):
        self.n_inputs = int(n_inputs)
        self.n_hidden = int(n_hidden)
        self.n_code = int(n_code)
        self.dropout_rate = float(dropout_rate)
        encoder_layers = [
            Dense(self.n_inputs, self.n_hidden, rng),
            BatchNorm(self.n_hidden),
            Dropout(self.dropout_rate),
            ReLU(),
            Dense(self.n_hidden, self.n_code, rng),
            ReLU(),
        ]
        decoder_layers = [
            Dense(self.n_code, self.n_hidden, rng),
            ReLU(),
            Dense(self.n_hidden, self.n_inputs, rng),
        ]
        self.n_encoder_layers = len(encoder_layers)
        self.model = Sequential(encoder_layers + decoder_layers)
        self.encoder = Sequential(encoder_layers)

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Map (n, n_inputs) rows to (n, n_code) embeddings, inference mode."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ShapeError(
                f"encode expects (n, {self.n_inputs}) input, got shape {x.shape}"
            )
        return self.encoder.forward(x, train=False)

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.model.forward(x, train=False)

    def reconstruction_error(self, x: np.ndarray) -> np.ndarray:
        """Per-row mean squared reconstruction error."""
        x = np.asarray(x, dtype=float)
        recon = self.reconstruct(x)
        return np.mean((recon - x) ** 2, axis=1)

    def to_doc(self) -> dict:
        return {
            "n_inputs": self.n_inputs,
            "n_hidden": self.n_hidden,
            "n_code": self.n_code,
            "dropout_rate": self.dropout_rate,
            "net": layer_to_doc(self.model),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Autoencoder":
        ae = cls(
            doc["n_inputs"],
            n_hidden=doc["n_hidden"],
            n_code=doc["n_code"],
            dropout_rate=doc["dropout_rate"],
        )
        net = layer_from_doc(doc["net"])
        if len(net.layers) != len(ae.model.layers):
            raise ShapeError(
                f"model document has {len(net.layers)} layers, expected "
                f"{len(ae.model.layers)}"
            )
        ae.model = net
        ae.encoder = Sequential(net.layers[: ae.n_encoder_layers])
        return ae


def ae_train(
    inputs: np.ndarray,
    seed: int = 0,
    config: TrainConfig | None = None,
) -> tuple[Autoencoder, TrainResult]:
    """Fit an autoencoder to reconstruct ``inputs`` (already flattened rows)."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2:
        raise ShapeError(f"expected (n, n_inputs) training data, got {inputs.shape}")
    if config is None:
        config = TrainConfig(seed=seed)
    ae = Autoencoder(inputs.shape[1], rng=rngmod.substream(seed, "autoencoder.init"))
    result = train_loop(
        ae.model,
        inputs,
        inputs,
        config,
        rng=rngmod.substream(seed, "autoencoder.train"),
    )
    return ae, result
