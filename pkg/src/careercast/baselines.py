"""Reference predictors the sequence model is judged against.

Covers carry-forward of the latest observed value, linear and ridge
regression in closed form, and a small dense net on the flattened
input block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .errors import NumericError, ParameterError, RankDeficiencyError, ShapeError
from .ingest import TARGET_AGES
from .nn import Dense, ReLU, Sequential, TrainConfig, TrainResult, train_loop

MLP_HIDDEN = (64, 32)


def last_value_predict(sequences, target_index: int) -> np.ndarray:
    """Carry each player's final input-age target value across all horizons.

    Reads the raw (unnormalized) block so the carried value is exactly
    the one that appeared in the source data.
    """
    if not sequences:
        raise ParameterError("no sequences to predict")
    out = np.empty((len(sequences), len(TARGET_AGES)), dtype=float)
    for i, seq in enumerate(sequences):
        out[i, :] = seq.raw_input[-1, target_index]
    return out


@dataclass
class LinearModel:
    """Weights for y = x @ coef + intercept, one column per output."""

    coef: np.ndarray
    intercept: np.ndarray
    l2: float

    @property
    def n_inputs(self) -> int:
        return self.coef.shape[0]


def _check_xy(x: np.ndarray, y: np.ndarray):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2:
        raise ShapeError(f"expected 2-d design matrix, got shape {x.shape}")
    if y.ndim == 1:
        y = y[:, None]
    if y.ndim != 2 or y.shape[0] != x.shape[0]:
        raise ShapeError(
            f"targets {y.shape} do not align with design matrix {x.shape}"
        )
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NumericError("design matrix or targets contain non-finite values")
    return x, y


def linear_fit(x: np.ndarray, y: np.ndarray, l2: float = 0.0) -> LinearModel:
    """Least squares (optionally ridge-penalized) in closed form.

    The intercept is never penalized. With ``l2`` = 0 a rank-deficient
    design is an error rather than an arbitrary pseudo-inverse pick.
    """
    x, y = _check_xy(x, y)
    if l2 < 0:
        raise ParameterError(f"l2 must be non-negative, got {l2}")
    n, p = x.shape
    xa = np.hstack([x, np.ones((n, 1))])
    if l2 == 0.0 and np.linalg.matrix_rank(xa) < p + 1:
        raise RankDeficiencyError(
            f"design matrix with intercept has rank below {p + 1}; "
            "add an l2 penalty or drop redundant columns"
        )
    gram = xa.T @ xa
    if l2 > 0.0:
        penalty = np.eye(p + 1) * l2
        penalty[p, p] = 0.0
        gram = gram + penalty
    try:
        weights = np.linalg.solve(gram, xa.T @ y)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"normal equations are singular: {exc}") from exc
    return LinearModel(coef=weights[:p, :], intercept=weights[p, :], l2=float(l2))


def linear_predict(model: LinearModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.n_inputs:
        raise ShapeError(
            f"expected (n, {model.n_inputs}) input, got shape {x.shape}"
        )
    return x @ model.coef + model.intercept


def penalized_objective(
    model: LinearModel, x: np.ndarray, y: np.ndarray, l2: float
) -> float:
    """Sum of squared residuals plus ``l2`` times squared non-intercept weights."""
    x, y = _check_xy(x, y)
    resid = linear_predict(model, x) - y
    return float((resid**2).sum() + l2 * (model.coef**2).sum())


def mlp_baseline_train(
    x: np.ndarray,
    y: np.ndarray,
    seed: int = 0,
    config: TrainConfig | None = None,
) -> tuple[Sequential, TrainResult]:
    """Fit a dense relu net on flattened input rows."""
    x, y = _check_xy(x, y)
    if config is None:
        config = TrainConfig(seed=seed)
    init_rng = rngmod.substream(seed, "mlp.init")
    sizes = (x.shape[1],) + MLP_HIDDEN + (y.shape[1],)
    layers = []
    for i in range(len(sizes) - 1):
        layers.append(Dense(sizes[i], sizes[i + 1], init_rng))
        if i < len(sizes) - 2:
            layers.append(ReLU())
    model = Sequential(layers)
    result = train_loop(
        model, x, y, config, rng=rngmod.substream(seed, "mlp.train")
    )
    return model, result
