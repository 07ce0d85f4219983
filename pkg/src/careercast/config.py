"""Pipeline configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .ingest import DEFAULT_TEST_FRACTION
from .nn import TrainConfig

MODEL_NAMES = ("proposed", "standard_lstm", "last_value", "linear", "ridge", "mlp")

# keys a training block may override; seed always follows the pipeline seed
TRAIN_KEYS = (
    "max_epochs",
    "batch_size",
    "patience",
    "validation_fraction",
    "learning_rate",
)


@dataclass
class PipelineConfig:
    """Everything a pipeline run needs, with usable defaults throughout.

    ``linear_lambda`` exists because the flattened design matrix has more
    columns than there are players, so exact unpenalized least squares is
    rank-deficient by construction; a tiny penalty keeps the baseline
    well-defined while staying numerically indistinguishable from OLS on
    full-rank problems.
    """

    input_csv: str | None = None
    schema_json: str | None = None
    out_dir: str = "out"
    seed: int = 0
    test_fraction: float = DEFAULT_TEST_FRACTION
    k_range: tuple = (2, 8)
    kmeans_restarts: int = 10
    autoencoder: dict = field(default_factory=dict)
    forecaster: dict = field(default_factory=dict)
    ridge_lambda: float = 1.0
    linear_lambda: float = 1e-8
    models: tuple = MODEL_NAMES

    def validate(self) -> "PipelineConfig":
        lo, hi = (int(v) for v in self.k_range)
        if not 1 <= lo <= hi:
            raise ConfigError(f"k_range must satisfy 1 <= lo <= hi, got {self.k_range}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if self.kmeans_restarts < 1:
            raise ConfigError(f"kmeans_restarts must be >= 1, got {self.kmeans_restarts}")
        if self.ridge_lambda < 0 or self.linear_lambda < 0:
            raise ConfigError("regression penalties must be non-negative")
        unknown = [m for m in self.models if m not in MODEL_NAMES]
        if unknown:
            raise ConfigError(
                f"unknown model(s) {unknown}; choose from {list(MODEL_NAMES)}"
            )
        for block_name in ("autoencoder", "forecaster"):
            self.train_config(block_name)
        return self

    def train_config(self, block_name: str) -> TrainConfig:
        """Build the training configuration for one stage."""
        block = getattr(self, block_name)
        bad = [k for k in block if k not in TRAIN_KEYS]
        if bad:
            raise ConfigError(
                f"unknown key(s) {bad} in {block_name!r} block; allowed: {list(TRAIN_KEYS)}"
            )
        cfg = TrainConfig(seed=self.seed, **block)
        cfg.validate()
        return cfg


def load_config(path) -> PipelineConfig:
    """Read a JSON config file; unknown keys are errors, not typos to ignore."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(PipelineConfig)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config key(s): {', '.join(unknown)}")
    if "k_range" in doc:
        kr = doc["k_range"]
        if not (isinstance(kr, list) and len(kr) == 2):
            raise ConfigError(f"{path}: k_range must be a [lo, hi] pair")
        doc["k_range"] = tuple(int(v) for v in kr)
    if "models" in doc:
        if not isinstance(doc["models"], list):
            raise ConfigError(f"{path}: models must be a list")
        doc["models"] = tuple(doc["models"])
    return PipelineConfig(**doc)


def with_overrides(cfg: PipelineConfig, **kwargs) -> PipelineConfig:
    """Apply non-None command-line overrides on top of a config."""
    updates = {k: v for k, v in kwargs.items() if v is not None}
    return replace(cfg, **updates) if updates else cfg
