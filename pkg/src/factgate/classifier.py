"""Naive Bayes over the eight category features, plus the worst-fact summary rule.

Class 1 / ``factual`` is the positive class throughout.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CATEGORY_NAMES, FactLabel, FeatureVector, Verdict, stack_features
from .errors import DegenerateVariance, EmptyTraining, NoFacts, SingleClassTraining
from .io_utils import atomic_write_text, dumps_json

DEFAULT_VAR_SMOOTHING = 1e-9
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NbModel:
    """Gaussian NB parameters.  Row 0 of ``means``/``variances`` is ``factual``,
    row 1 ``not_factual``; ``variances`` already include ``var_smoothing``."""

    priors: tuple[float, float]
    means: np.ndarray
    variances: np.ndarray
    var_smoothing: float
    feature_order: tuple[str, ...] = CATEGORY_NAMES

    kind = "gaussian"

    def __post_init__(self):
        means = np.array(self.means, dtype=float)
        variances = np.array(self.variances, dtype=float)
        if means.shape != variances.shape or means.ndim != 2 or means.shape[0] != 2:
            raise ValueError("means and variances must both have shape (2, n_features)")
        if len(self.feature_order) != means.shape[1]:
            raise ValueError("feature_order length does not match parameter width")
        if abs(sum(self.priors) - 1.0) > 1e-12 or not all(0.0 < p < 1.0 for p in self.priors):
            raise ValueError(f"priors must lie in (0, 1) and sum to 1, got {self.priors}")
        if not np.all(variances > 0) or not np.all(np.isfinite(variances)):
            raise DegenerateVariance("all variances must be finite and > 0")
        means.setflags(write=False)
        variances.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "priors", tuple(float(p) for p in self.priors))

    def log_joint(self, x: np.ndarray) -> tuple[float, float]:
        """log P(C) + sum_i log N(x_i; mean, var) for (factual, not_factual)."""
        x = np.asarray(x, dtype=float)
        ll = -0.5 * (_LOG_2PI + np.log(self.variances) + (x - self.means) ** 2 / self.variances)
        totals = np.log(self.priors) + ll.sum(axis=1)
        return float(totals[0]), float(totals[1])

    def log_odds(self, x: np.ndarray) -> float:
        """log P(factual | x) - log P(not_factual | x).

        Taken per feature before summing: with tiny variances each class term is
        huge while their difference is small, and identical terms must cancel exactly.
        """
        x = np.asarray(x, dtype=float)
        v_f, v_n = self.variances
        m_f, m_n = self.means
        per_feature = -0.5 * (np.log(v_f / v_n) + ((x - m_f) ** 2 / v_f - (x - m_n) ** 2 / v_n))
        return math.fsum([math.log(self.priors[0] / self.priors[1]), *per_feature.tolist()])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "priors": {"factual": self.priors[0], "not_factual": self.priors[1]},
            "means": {"factual": self.means[0].tolist(), "not_factual": self.means[1].tolist()},
            "variances": {
                "factual": self.variances[0].tolist(),
                "not_factual": self.variances[1].tolist(),
            },
            "var_smoothing": self.var_smoothing,
            "feature_order": list(self.feature_order),
        }


@dataclass(frozen=True)
class BernoulliNbModel:
    """Bernoulli NB on features binarised at ``threshold`` with add-``alpha`` smoothing."""

    priors: tuple[float, float]
    feature_probs: np.ndarray  # P(x_i >= threshold | C), shape (2, n_features)
    alpha: float = 1.0
    threshold: float = 0.5
    feature_order: tuple[str, ...] = CATEGORY_NAMES

    kind = "bernoulli"

    def __post_init__(self):
        probs = np.array(self.feature_probs, dtype=float)
        if probs.ndim != 2 or probs.shape[0] != 2 or len(self.feature_order) != probs.shape[1]:
            raise ValueError("feature_probs must have shape (2, n_features)")
        if not np.all((probs > 0) & (probs < 1)):
            raise ValueError("feature probabilities must lie strictly inside (0, 1)")
        probs.setflags(write=False)
        object.__setattr__(self, "feature_probs", probs)
        object.__setattr__(self, "priors", tuple(float(p) for p in self.priors))

    def log_joint(self, x: np.ndarray) -> tuple[float, float]:
        b = (np.asarray(x, dtype=float) >= self.threshold).astype(float)
        ll = b * np.log(self.feature_probs) + (1 - b) * np.log1p(-self.feature_probs)
        totals = np.log(self.priors) + ll.sum(axis=1)
        return float(totals[0]), float(totals[1])

    def log_odds(self, x: np.ndarray) -> float:
        a_f, a_nf = self.log_joint(x)
        return a_f - a_nf

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "priors": {"factual": self.priors[0], "not_factual": self.priors[1]},
            "feature_probs": {
                "factual": self.feature_probs[0].tolist(),
                "not_factual": self.feature_probs[1].tolist(),
            },
            "alpha": self.alpha,
            "threshold": self.threshold,
            "feature_order": list(self.feature_order),
        }


def _column_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and population variance with correctly rounded sums,
    so results do not depend on row order."""
    n = len(X)
    means = np.array([math.fsum(col) / n for col in X.T])
    variances = np.array([math.fsum((col - m) ** 2) / n for col, m in zip(X.T, means)])
    return means, variances


def _split_classes(features, labels) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    X = stack_features(features)
    y = np.asarray(labels, dtype=int)
    if len(X) == 0:
        raise EmptyTraining("no training examples")
    if len(X) != len(y):
        raise ValueError("features and labels differ in length")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    pos, neg = X[y == 1], X[y == 0]
    if len(pos) == 0 or len(neg) == 0:
        missing = "factual" if len(pos) == 0 else "not_factual"
        raise SingleClassTraining(f"no {missing} examples in training data")
    return X, pos, neg


def train(
    features: Sequence[FeatureVector] | np.ndarray,
    labels: Sequence[int],
    var_smoothing: float | None = None,
    feature_order: Sequence[str] | None = None,
) -> NbModel:
    """Fit Gaussian NB: empirical priors, per-class mean and population variance.

    ``var_smoothing`` is the absolute epsilon added to every variance.  When
    omitted it is ``1e-9`` times the largest per-feature variance of the whole
    training set (or ``1e-9`` outright if every feature is constant).
    """
    X, pos, neg = _split_classes(features, labels)
    if var_smoothing is None:
        var_smoothing = DEFAULT_VAR_SMOOTHING * float(_column_stats(X)[1].max())
        if var_smoothing == 0.0:
            var_smoothing = DEFAULT_VAR_SMOOTHING
    if var_smoothing < 0:
        raise ValueError("var_smoothing must be >= 0")

    n = len(X)
    (mu_pos, var_pos), (mu_neg, var_neg) = _column_stats(pos), _column_stats(neg)
    means = np.stack([mu_pos, mu_neg])
    variances = np.stack([var_pos, var_neg]) + var_smoothing
    order = tuple(feature_order) if feature_order is not None else _default_order(X.shape[1])
    return NbModel((len(pos) / n, len(neg) / n), means, variances, float(var_smoothing), order)


def train_bernoulli(
    features, labels, alpha: float = 1.0, threshold: float = 0.5, feature_order=None
) -> BernoulliNbModel:
    X, pos, neg = _split_classes(features, labels)
    n = len(X)
    probs = np.stack(
        [
            ((pos >= threshold).sum(axis=0) + alpha) / (len(pos) + 2 * alpha),
            ((neg >= threshold).sum(axis=0) + alpha) / (len(neg) + 2 * alpha),
        ]
    )
    order = tuple(feature_order) if feature_order is not None else _default_order(X.shape[1])
    return BernoulliNbModel((len(pos) / n, len(neg) / n), probs, alpha, threshold, order)


def _default_order(width: int) -> tuple[str, ...]:
    return CATEGORY_NAMES if width == len(CATEGORY_NAMES) else tuple(f"f{i}" for i in range(width))


def _as_array(x) -> np.ndarray:
    return x.as_array() if isinstance(x, FeatureVector) else np.asarray(x, dtype=float)


def _logistic(z: float) -> float:
    # 1 / (1 + exp(-z)) without overflow; exactly 0.5 at z == 0
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def posterior_factual(model, x) -> float:
    return _logistic(model.log_odds(_as_array(x)))


def posterior_not_factual(model, x) -> float:
    return _logistic(-model.log_odds(_as_array(x)))


def classify_fact(model, x) -> FactLabel:
    """Posterior argmax; exact ties go to ``not_factual``."""
    return FactLabel.FACTUAL if model.log_odds(_as_array(x)) > 0 else FactLabel.NOT_FACTUAL


def judge_summary(model, vectors: Sequence) -> Verdict:
    """Score a summary by its weakest fact: min posterior, and factual only if every fact is."""
    if len(vectors) == 0:
        raise NoFacts("cannot judge a summary with no facts")
    posteriors = tuple(posterior_factual(model, v) for v in vectors)
    labels = tuple(classify_fact(model, v) for v in vectors)
    label = (
        FactLabel.FACTUAL
        if all(lab is FactLabel.FACTUAL for lab in labels)
        else FactLabel.NOT_FACTUAL
    )
    return Verdict(posteriors, labels, min(posteriors), label)


def model_from_dict(d: dict):
    order = tuple(d["feature_order"])
    priors = (d["priors"]["factual"], d["priors"]["not_factual"])
    kind = d.get("kind", "gaussian")
    if kind == "gaussian":
        return NbModel(
            priors,
            np.array([d["means"]["factual"], d["means"]["not_factual"]]),
            np.array([d["variances"]["factual"], d["variances"]["not_factual"]]),
            float(d["var_smoothing"]),
            order,
        )
    if kind == "bernoulli":
        return BernoulliNbModel(
            priors,
            np.array([d["feature_probs"]["factual"], d["feature_probs"]["not_factual"]]),
            float(d["alpha"]),
            float(d["threshold"]),
            order,
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model, path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_json(model.to_dict()))


def load_model(path: str | os.PathLike, require_canonical: bool = True):
    with open(path, encoding="utf-8") as fh:
        model = model_from_dict(json.load(fh))
    if require_canonical and tuple(model.feature_order) != CATEGORY_NAMES:
        raise ValueError(
            f"model feature_order {list(model.feature_order)} is not the canonical category order"
        )
    return model
