"""Cross-comparison of summary facts against source facts, and pair-to-fact aggregation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .backend import BackendRequest, yes_probability
from .core import CATEGORY_ORDER, N_FEATURES, FactSet, FactualityCategory, FeatureVector
from .errors import BackendError, IndexOutOfRange
from .prompts import pair_prompt

_SUPPORT_IDX = FactualityCategory.SUPPORTED.index


@dataclass(frozen=True)
class PairScore:
    summary_idx: int
    source_idx: int
    category: FactualityCategory
    p_yes: float


@dataclass(frozen=True)
class ScoreMatrix:
    """Dense (n_summary, n_source, 8) array of P(yes) values."""

    doc_id: str
    scores: np.ndarray

    def __post_init__(self):
        arr = np.array(self.scores, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != N_FEATURES or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"score matrix must have shape (n_summary, n_source, 8), got {arr.shape}")
        if np.isnan(arr).any() or (arr < 0).any() or (arr > 1).any():
            raise ValueError("score matrix values must lie in [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "scores", arr)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.scores.shape

    def __iter__(self) -> Iterator[PairScore]:
        n_sum, n_src, _ = self.scores.shape
        for i in range(n_sum):
            for j in range(n_src):
                for cat in CATEGORY_ORDER:
                    yield PairScore(i, j, cat, float(self.scores[i, j, cat.index]))

    def pairs_for(self, i: int) -> list[list[float]]:
        """Raw (n_source, 8) block for summary fact ``i`` as nested lists."""
        return self.scores[i].tolist()


def score_pairs(
    summary_facts: FactSet,
    source_facts: FactSet,
    backend,
    concurrency: int = 1,
    doc_id: str | None = None,
) -> ScoreMatrix:
    """Ask every category question for every (summary fact, source fact) pair.

    Issues ``n_summary * n_source * 8`` backend queries.  Any failure aborts
    the whole matrix; the error names the offending (i, j, category).
    """
    if not len(summary_facts) or not len(source_facts):
        raise ValueError("both fact sets must be non-empty")
    doc_id = doc_id if doc_id is not None else summary_facts.doc_id
    cells = [
        (i, j, cat)
        for i in range(len(summary_facts))
        for j in range(len(source_facts))
        for cat in CATEGORY_ORDER
    ]

    def one(cell):
        i, j, cat = cell
        prompt = pair_prompt(source_facts.facts[j].text, summary_facts.facts[i].text, cat)
        try:
            return yes_probability(backend.query(BackendRequest(prompt)))
        except BackendError as exc:
            raise BackendError(
                f"{doc_id}: summary fact {i}, source fact {j}, {cat.display_name}: {exc}"
            ) from exc

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            values = list(pool.map(one, cells))
    else:
        values = [one(c) for c in cells]

    arr = np.asarray(values, dtype=float).reshape(len(summary_facts), len(source_facts), N_FEATURES)
    return ScoreMatrix(doc_id, arr)


def aggregate_features(matrix: ScoreMatrix, i: int) -> FeatureVector:
    """Collapse summary fact ``i``'s pair scores into one feature vector.

    Support is the max over source facts (one supporting fact suffices); each
    error category is the min (the error must hold against every source fact).
    """
    n_sum = matrix.scores.shape[0]
    if not 0 <= i < n_sum:
        raise IndexOutOfRange(f"summary fact index {i} outside [0, {n_sum})")
    block = matrix.scores[i]
    feats = block.min(axis=0)
    feats[_SUPPORT_IDX] = block[:, _SUPPORT_IDX].max()
    return FeatureVector(tuple(feats.tolist()))


def aggregate_all(matrix: ScoreMatrix) -> list[FeatureVector]:
    return [aggregate_features(matrix, i) for i in range(matrix.scores.shape[0])]
