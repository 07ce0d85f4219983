"""Versioned JSON persistence for models.

Documents carry a format tag, a version, a ``kind`` string identifying
what the model is for, caller-provided metadata (artifact hashes and the
like), and the layer stack with flat row-major value arrays. Floats are
written with Python's shortest round-trip repr, so save -> load is
value-exact for doubles.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import ArtifactError
from .layers import LSTM, BatchNorm, Dense, Dropout, ReLU, Sequential

FORMAT = "careercast-model"
VERSION = 1


def array_to_doc(arr: np.ndarray) -> dict:
    return {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def array_from_doc(doc: dict) -> np.ndarray:
    return np.array(doc["data"], dtype=float).reshape(doc["shape"])


def layer_to_doc(layer) -> dict:
    if isinstance(layer, Dense):
        return {
            "type": "dense",
            "n_in": layer.n_in,
            "n_out": layer.n_out,
            "weight": array_to_doc(layer.weight),
            "bias": array_to_doc(layer.bias),
        }
    if isinstance(layer, ReLU):
        return {"type": "relu"}
    if isinstance(layer, BatchNorm):
        return {
            "type": "batchnorm",
            "n": layer.n,
            "momentum": layer.momentum,
            "eps": layer.eps,
            "scale": array_to_doc(layer.scale),
            "shift": array_to_doc(layer.shift),
            "running_mean": array_to_doc(layer.running_mean),
            "running_var": array_to_doc(layer.running_var),
        }
    if isinstance(layer, Dropout):
        return {"type": "dropout", "rate": layer.rate}
    if isinstance(layer, LSTM):
        return {
            "type": "lstm",
            "n_in": layer.n_in,
            "n_hidden": layer.n_hidden,
            "w_input": array_to_doc(layer.w_input),
            "w_hidden": array_to_doc(layer.w_hidden),
            "bias": array_to_doc(layer.bias),
        }
    if isinstance(layer, Sequential):
        return {"type": "sequential", "layers": [layer_to_doc(l) for l in layer.layers]}
    raise ArtifactError(f"cannot serialize layer of type {type(layer).__name__}")


def layer_from_doc(doc: dict):
    kind = doc.get("type")
    if kind == "dense":
        layer = Dense(doc["n_in"], doc["n_out"])
        layer.weight = array_from_doc(doc["weight"])
        layer.bias = array_from_doc(doc["bias"])
        return layer
    if kind == "relu":
        return ReLU()
    if kind == "batchnorm":
        layer = BatchNorm(doc["n"], momentum=doc["momentum"], eps=doc["eps"])
        layer.scale = array_from_doc(doc["scale"])
        layer.shift = array_from_doc(doc["shift"])
        layer.running_mean = array_from_doc(doc["running_mean"])
        layer.running_var = array_from_doc(doc["running_var"])
        return layer
    if kind == "dropout":
        return Dropout(doc["rate"])
    if kind == "lstm":
        layer = LSTM(doc["n_in"], doc["n_hidden"])
        layer.w_input = array_from_doc(doc["w_input"])
        layer.w_hidden = array_from_doc(doc["w_hidden"])
        layer.bias = array_from_doc(doc["bias"])
        return layer
    if kind == "sequential":
        return Sequential([layer_from_doc(d) for d in doc["layers"]])
    raise ArtifactError(f"unknown layer type {kind!r} in model document")


def wrap_doc(kind: str, model_doc: dict, meta: dict | None = None) -> dict:
    return {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "meta": meta or {},
        "model": model_doc,
    }


def unwrap_doc(doc: dict, expected_kind: str | None = None) -> tuple[dict, dict]:
    """Validate the envelope and return (model_doc, meta)."""
    if doc.get("format") != FORMAT:
        raise ArtifactError(f"not a model document (format={doc.get('format')!r})")
    if doc.get("version") != VERSION:
        raise ArtifactError(
            f"unsupported model document version {doc.get('version')!r} "
            f"(this build reads version {VERSION})"
        )
    if expected_kind is not None and doc.get("kind") != expected_kind:
        raise ArtifactError(
            f"expected a {expected_kind!r} model, found {doc.get('kind')!r}"
        )
    return doc["model"], doc.get("meta", {})


def save_doc(path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_doc(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ArtifactError(f"missing artifact: {path}") from None
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: corrupt artifact: {exc}") from exc
