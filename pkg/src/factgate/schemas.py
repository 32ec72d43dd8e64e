"""JSON schemas for every file the CLI writes; commands validate their output before exiting 0."""

from __future__ import annotations

import json
import os

import jsonschema

from .core import CATEGORY_NAMES

_UNIT = {"type": "number", "minimum": 0, "maximum": 1}
_THRESHOLD = {"anyOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}
_FEATURES = {
    "type": "object",
    "properties": {name: _UNIT for name in CATEGORY_NAMES},
    "required": list(CATEGORY_NAMES),
    "additionalProperties": False,
}
_VEC8 = {"type": "array", "items": _UNIT, "minItems": 8, "maxItems": 8}

FACTS_LINE = {
    "type": "object",
    "properties": {
        "doc_id": {"type": "string", "minLength": 1},
        "source_facts": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 1},
        "summary_facts": {"type": "array", "items": {"type": "string", "minLength": 1}, "minItems": 1},
        "provenance": {"enum": ["manual", "backend"]},
    },
    "required": ["doc_id", "source_facts", "summary_facts"],
}

SCORE_LINE = {
    "type": "object",
    "properties": {
        "doc_id": {"type": "string"},
        "dataset": {"type": "string"},
        "cut": {"enum": ["val", "test", None]},
        "label": {"enum": [0, 1, None]},
        "summary_idx": {"type": "integer", "minimum": 0},
        "summary_fact": {"type": "string"},
        "features": _FEATURES,
        "pairs": {"type": "array", "items": _VEC8, "minItems": 1},
    },
    "required": ["doc_id", "dataset", "cut", "label", "summary_idx", "features", "pairs"],
}

_PER_CLASS_VEC = {
    "type": "object",
    "properties": {"factual": {"type": "array"}, "not_factual": {"type": "array"}},
    "required": ["factual", "not_factual"],
}
MODEL = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["gaussian", "bernoulli"]},
        "priors": {
            "type": "object",
            "properties": {"factual": _UNIT, "not_factual": _UNIT},
            "required": ["factual", "not_factual"],
        },
        "means": _PER_CLASS_VEC,
        "variances": _PER_CLASS_VEC,
        "var_smoothing": {"type": "number", "minimum": 0},
        "feature_order": {"const": list(CATEGORY_NAMES)},
    },
    "required": ["priors", "feature_order"],
    "if": {"properties": {"kind": {"const": "bernoulli"}}, "required": ["kind"]},
    "then": {"required": ["feature_probs", "alpha", "threshold"]},
    "else": {"required": ["means", "variances", "var_smoothing"]},
}

_METRICS = {
    "type": "object",
    "properties": {
        "auc": {"anyOf": [_UNIT, {"type": "null"}]},
        "accuracy": _UNIT,
        "f1": _UNIT,
        "precision": _UNIT,
        "threshold": _THRESHOLD,
        "n_examples": {"type": "integer", "minimum": 1},
    },
    "required": ["auc", "accuracy", "f1", "precision", "threshold", "n_examples"],
}
REPORT = {
    "type": "object",
    "properties": {
        "auc": _UNIT,
        "accuracy": _UNIT,
        "f1": _UNIT,
        "precision": _UNIT,
        "threshold": _THRESHOLD,
        "n_examples": {"type": "integer", "minimum": 1},
        "per_dataset": {"type": "object", "additionalProperties": _METRICS},
    },
    "required": ["auc", "accuracy", "f1", "precision", "threshold", "n_examples", "per_dataset"],
}

DIAGNOSTICS = {
    "type": "object",
    "properties": {
        "feature_order": {"const": list(CATEGORY_NAMES)},
        "correlation": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "number", "minimum": -1, "maximum": 1}},
        },
        "pca": {
            "type": "object",
            "properties": {
                "ratios": {"type": "array", "items": _UNIT},
                "components": {"type": "array", "items": {"type": "array"}},
            },
            "required": ["ratios", "components"],
        },
    },
    "required": ["correlation", "pca"],
}

PREDICTION_LINE = {
    "type": "object",
    "properties": {
        "doc_id": {"type": "string"},
        "fact_posteriors": {"type": "array", "items": _UNIT, "minItems": 1},
        "summary_score": _UNIT,
        "summary_label": {"enum": ["factual", "not_factual"]},
    },
    "required": ["doc_id", "fact_posteriors", "summary_score", "summary_label"],
}


def validate_json_file(path: str | os.PathLike, schema: dict) -> None:
    with open(path, encoding="utf-8") as fh:
        jsonschema.validate(json.load(fh), schema)


def validate_jsonl_file(path: str | os.PathLike, schema: dict, allow_empty: bool = False) -> int:
    n = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                jsonschema.validate(json.loads(line), schema)
            except jsonschema.ValidationError as exc:
                raise jsonschema.ValidationError(f"{path}:{line_no}: {exc.message}") from exc
            n += 1
    if n == 0 and not allow_empty:
        raise jsonschema.ValidationError(f"{path}: no records")
    return n
