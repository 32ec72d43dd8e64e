"""Evaluation metrics and feature diagnostics (correlation, PCA via Jacobi rotations)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import stack_features
from .errors import InsufficientData, OneClassOnly

OBJECTIVES = ("accuracy", "balanced_accuracy")


@dataclass(frozen=True)
class Metrics:
    auc: float | None
    accuracy: float
    f1: float
    precision: float
    threshold: float
    n_examples: int

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "threshold": _json_float(self.threshold),
            "n_examples": self.n_examples,
        }


@dataclass(frozen=True)
class EvalReport:
    auc: float
    accuracy: float
    f1: float
    precision: float
    threshold: float
    n_examples: int
    per_dataset: dict[str, Metrics] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_examples <= 0:
            raise ValueError("n_examples must be positive")
        for name in ("auc", "accuracy", "f1", "precision"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def to_dict(self) -> dict:
        return {
            "auc": self.auc,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "precision": self.precision,
            "threshold": _json_float(self.threshold),
            "n_examples": self.n_examples,
            "per_dataset": {k: self.per_dataset[k].to_dict() for k in sorted(self.per_dataset)},
        }


def _json_float(x: float):
    # JSON has no infinities; sentinel thresholds are written as strings
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _check(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-D and equal length")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0 or 1")
    if y.sum() == 0 or y.sum() == len(y):
        raise OneClassOnly("need both positive and negative labels")
    return s, y


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """ROC AUC as the Mann-Whitney statistic, ties counted half.

    Uses midranks: U = (rank sum of positives) - n_pos(n_pos+1)/2.
    """
    s, y = _check(scores, labels)
    order = np.argsort(s, kind="stable")
    sorted_s = s[order]
    ranks = np.empty(len(s), dtype=float)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and sorted_s[j + 1] == sorted_s[i]:
            j += 1
        # 1-based midrank of the tie block; a multiple of 0.5, so exact in floating point
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    u = float(ranks[y == 1].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def confusion(scores, labels, threshold: float) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) predicting positive iff score >= threshold."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    tn = int(np.sum(~pred & (y == 0)))
    return tp, fp, fn, tn


def metrics_from_confusion(tp: int, fp: int, fn: int, tn: int) -> tuple[float, float, float]:
    n = tp + fp + fn + tn
    accuracy = (tp + tn) / n
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return accuracy, f1, precision


def threshold_metrics(scores, labels, threshold: float) -> tuple[float, float, float]:
    """(accuracy, f1, precision) at ``threshold``."""
    _check(scores, labels)
    return metrics_from_confusion(*confusion(scores, labels, threshold))


def balanced_accuracy(scores, labels, threshold: float) -> float:
    tp, fp, fn, tn = confusion(scores, labels, threshold)
    return 0.5 * (tp / (tp + fn) + tn / (tn + fp))


def candidate_thresholds(scores) -> list[float]:
    """-inf, midpoints between adjacent distinct scores, +inf."""
    distinct = sorted(set(float(v) for v in scores))
    mids = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    return [-math.inf, *mids, math.inf]


def select_threshold(val_scores, val_labels, objective: str = "accuracy") -> float:
    """Candidate threshold maximising ``objective`` on validation data; ties go to the smaller one."""
    s, y = _check(val_scores, val_labels)
    if objective not in OBJECTIVES:
        raise ValueError(f"objective must be one of {OBJECTIVES}")
    best_t, best_v = None, -1.0
    for t in candidate_thresholds(s):
        if objective == "accuracy":
            tp, fp, fn, tn = confusion(s, y, t)
            v = (tp + tn) / len(s)
        else:
            v = balanced_accuracy(s, y, t)
        if v > best_v:
            best_t, best_v = t, v
    return best_t


def evaluate_scores(
    test_scores,
    test_labels,
    threshold: float,
) -> Metrics:
    a = auc(test_scores, test_labels)
    acc, f1, prec = threshold_metrics(test_scores, test_labels, threshold)
    return Metrics(a, acc, f1, prec, threshold, len(test_scores))


# ---------------------------------------------------------------------------
# diagnostics


def pearson_matrix(vectors) -> np.ndarray:
    """Pairwise Pearson correlations between feature columns.

    A zero-variance feature has correlation 0 with everything, itself
    included, and triggers a warning.
    """
    X = stack_features(vectors)
    if len(X) < 2:
        raise InsufficientData("correlation needs at least 2 vectors")
    n, d = X.shape
    centered = X - np.array([math.fsum(col) / n for col in X.T])
    ss = np.array([math.fsum(col * col) for col in centered.T])
    flat = ss <= 0.0
    if flat.any():
        warnings.warn(
            f"zero-variance feature(s) at column(s) {np.flatnonzero(flat).tolist()}; "
            "their correlations are reported as 0",
            RuntimeWarning,
            stacklevel=2,
        )
    corr = np.zeros((d, d))
    for a in range(d):
        if flat[a]:
            continue
        corr[a, a] = 1.0
        for b in range(a + 1, d):
            if flat[b]:
                continue
            r = math.fsum(centered[:, a] * centered[:, b]) / math.sqrt(ss[a] * ss[b])
            corr[a, b] = corr[b, a] = min(1.0, max(-1.0, r))
    return corr


def covariance(X: np.ndarray) -> np.ndarray:
    """Sample covariance (n - 1 denominator) of the columns of X."""
    n = len(X)
    centered = X - X.mean(axis=0)
    return centered.T @ centered / (n - 1)


def jacobi_eigh(
    matrix: np.ndarray, tol: float = 1e-10, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all (p, q) pairs, zeroing each off-diagonal entry with a plane
    rotation, until the off-diagonal Frobenius norm drops below ``tol``.
    Returns (eigenvalues, eigenvectors as columns), unsorted.
    """
    A = np.array(matrix, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("matrix must be symmetric")
    A = (A + A.T) / 2.0
    V = np.eye(n)

    off_mask = ~np.eye(n, dtype=bool)

    def off_norm() -> float:
        # summed directly; total minus diagonal cancels badly once off-diagonals are tiny
        return math.sqrt(float(np.sum(A[off_mask] ** 2)))

    for _ in range(max_sweeps):
        if off_norm() < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                # Rotation angle from the stable tangent formula
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ rot
                A[idx, :] = rot.T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                V[:, idx] = V[:, idx] @ rot
    else:
        if off_norm() >= tol:
            raise RuntimeError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return np.diag(A).copy(), V


@dataclass(frozen=True)
class PcaResult:
    components: np.ndarray  # (k, d), rows orthonormal
    eigenvalues: np.ndarray  # (k,)
    explained_variance_ratio: np.ndarray  # (k,)
    mean: np.ndarray
    covariance: np.ndarray

    def to_dict(self) -> dict:
        return {
            "ratios": self.explained_variance_ratio.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "components": self.components.tolist(),
        }


def pca(vectors, k: int) -> PcaResult:
    X = stack_features(vectors)
    if len(X) < 2:
        raise InsufficientData("PCA needs at least 2 vectors")
    d = X.shape[1]
    if not 1 <= k <= d:
        raise ValueError(f"k must lie in [1, {d}]")
    cov = covariance(X)
    vals, vecs = jacobi_eigh(cov)
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    total = float(vals.sum())
    if total <= 0.0:
        raise InsufficientData("all features are constant; no variance to explain")
    # clamp round-off negatives so ratios stay non-negative and non-increasing
    ratios = np.clip(vals, 0.0, None) / total
    # deterministic sign: largest-magnitude entry of each component is positive
    for c in range(d):
        v = vecs[:, c]
        if v[np.argmax(np.abs(v))] < 0:
            vecs[:, c] = -v
    return PcaResult(vecs[:, :k].T.copy(), vals[:k].copy(), ratios[:k], X.mean(axis=0), cov)
