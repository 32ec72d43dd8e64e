"""Domain types and the factuality taxonomy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


class Polarity(str, enum.Enum):
    ERROR = "error"
    SUPPORT = "support"


class FactualityCategory(str, enum.Enum):
    """The eight categories a summary statement is checked against.

    Member order is the canonical feature order used everywhere.
    """

    PREDE = "prede"
    ENTE = "ente"
    CIRCE = "circe"
    COREFE = "corefe"
    LINKE = "linke"
    OUTE = "oute"
    GRAME = "grame"
    SUPPORTED = "supported"

    @property
    def polarity(self) -> Polarity:
        return Polarity.SUPPORT if self is FactualityCategory.SUPPORTED else Polarity.ERROR

    @property
    def display_name(self) -> str:
        return _DISPLAY[self]

    @property
    def index(self) -> int:
        return CATEGORY_ORDER.index(self)

    @property
    def question(self) -> str:
        return _QUESTIONS[self]


_DISPLAY = {
    FactualityCategory.PREDE: "PredE",
    FactualityCategory.ENTE: "EntE",
    FactualityCategory.CIRCE: "CircE",
    FactualityCategory.COREFE: "CorefE",
    FactualityCategory.LINKE: "LinkE",
    FactualityCategory.OUTE: "OutE",
    FactualityCategory.GRAME: "GramE",
    FactualityCategory.SUPPORTED: "Supported",
}

_QUESTIONS = {
    FactualityCategory.PREDE: (
        "Is the predicate in the summary statement inconsistent with the source statement? "
        "Answer yes or no."
    ),
    FactualityCategory.ENTE: (
        "Are the primary arguments of the predicate in the summary statement, or their "
        "attributes, incorrect according to the source statement? Answer yes or no."
    ),
    FactualityCategory.CIRCE: (
        "Is the circumstance around the predicate in the summary statement, such as its "
        "location or time, incorrect according to the source statement? Answer yes or no."
    ),
    FactualityCategory.COREFE: (
        "Does a pronoun or reference in the summary statement have an incorrect or "
        "non-existent antecedent according to the source statement? Answer yes or no."
    ),
    FactualityCategory.LINKE: (
        "Is the way the summary statement links events, such as their temporal order or "
        "causal relation, wrong according to the source statement? Answer yes or no."
    ),
    FactualityCategory.OUTE: (
        "Does the summary statement contain information that is not present in the source "
        "statement? Answer yes or no."
    ),
    FactualityCategory.GRAME: (
        "Is the grammar of the summary statement so erroneous that it becomes meaningless? "
        "Answer yes or no."
    ),
    FactualityCategory.SUPPORTED: (
        "Is the summary statement perfectly supported by the source statement? "
        "Answer yes or no."
    ),
}

CATEGORY_ORDER: tuple[FactualityCategory, ...] = tuple(FactualityCategory)
CATEGORY_NAMES: tuple[str, ...] = tuple(c.value for c in CATEGORY_ORDER)
N_FEATURES = len(CATEGORY_ORDER)


def category_question(cat: FactualityCategory) -> str:
    """Fixed yes/no question asked of the backend for ``cat``."""
    return FactualityCategory(cat).question


def category_from_question(question: str) -> FactualityCategory:
    for cat, q in _QUESTIONS.items():
        if q == question:
            return cat
    raise KeyError(f"not a category question: {question!r}")


class Origin(str, enum.Enum):
    SOURCE = "source"
    SUMMARY = "summary"


class Provenance(str, enum.Enum):
    BACKEND = "backend"
    MANUAL = "manual"


class FactLabel(str, enum.Enum):
    FACTUAL = "factual"
    NOT_FACTUAL = "not_factual"

    @classmethod
    def from_int(cls, label: int) -> "FactLabel":
        return cls.FACTUAL if label == 1 else cls.NOT_FACTUAL

    def as_int(self) -> int:
        return 1 if self is FactLabel.FACTUAL else 0


@dataclass(frozen=True)
class AtomicFact:
    text: str
    origin: Origin
    index: int
    provenance: Provenance = Provenance.MANUAL

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValueError("atomic fact text must be non-empty")
        if self.index < 0:
            raise ValueError(f"negative fact index {self.index}")
        object.__setattr__(self, "origin", Origin(self.origin))
        object.__setattr__(self, "provenance", Provenance(self.provenance))


@dataclass(frozen=True)
class FactSet:
    doc_id: str
    origin: Origin
    facts: tuple[AtomicFact, ...]

    def __post_init__(self):
        object.__setattr__(self, "origin", Origin(self.origin))
        object.__setattr__(self, "facts", tuple(self.facts))
        for expected, fact in enumerate(self.facts):
            if fact.index != expected:
                raise ValueError(
                    f"{self.doc_id}: fact indices must be contiguous from 0, "
                    f"got {fact.index} at position {expected}"
                )
            if fact.origin is not self.origin:
                raise ValueError(f"{self.doc_id}: fact {expected} has origin {fact.origin.value}")

    @classmethod
    def from_texts(
        cls,
        doc_id: str,
        origin: Origin | str,
        texts: Iterable[str],
        provenance: Provenance | str = Provenance.MANUAL,
    ) -> "FactSet":
        origin = Origin(origin)
        facts = tuple(
            AtomicFact(t.strip(), origin, i, Provenance(provenance)) for i, t in enumerate(texts)
        )
        return cls(doc_id, origin, facts)

    @property
    def texts(self) -> list[str]:
        return [f.text for f in self.facts]

    def __len__(self) -> int:
        return len(self.facts)


@dataclass(frozen=True)
class FeatureVector:
    """Eight per-category probabilities for one summary fact, in canonical order."""

    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != N_FEATURES:
            raise ValueError(f"feature vector needs {N_FEATURES} values, got {len(vals)}")
        for name, v in zip(CATEGORY_NAMES, vals):
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValueError(f"feature {name}={v} outside [0, 1]")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, cat: FactualityCategory | int) -> float:
        if isinstance(cat, FactualityCategory):
            return self.values[cat.index]
        return self.values[cat]

    def __len__(self) -> int:
        return N_FEATURES

    def __iter__(self):
        return iter(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def to_dict(self) -> dict[str, float]:
        return dict(zip(CATEGORY_NAMES, self.values))

    @classmethod
    def from_dict(cls, d: Mapping[str, float]) -> "FeatureVector":
        missing = set(CATEGORY_NAMES) - set(d)
        if missing:
            raise ValueError(f"missing features: {sorted(missing)}")
        return cls(tuple(d[name] for name in CATEGORY_NAMES))

    @classmethod
    def ideal(cls) -> "FeatureVector":
        """All error features 0, support 1."""
        return cls(tuple(1.0 if c.polarity is Polarity.SUPPORT else 0.0 for c in CATEGORY_ORDER))


@dataclass(frozen=True)
class Verdict:
    fact_posteriors: tuple[float, ...]
    fact_labels: tuple[FactLabel, ...]
    summary_score: float
    summary_label: FactLabel

    def to_dict(self) -> dict:
        return {
            "fact_posteriors": list(self.fact_posteriors),
            "fact_labels": [lab.value for lab in self.fact_labels],
            "summary_score": self.summary_score,
            "summary_label": self.summary_label.value,
        }


def stack_features(vectors: Sequence[FeatureVector] | np.ndarray) -> np.ndarray:
    """(n, d) float array from feature vectors or anything array-like."""
    if isinstance(vectors, np.ndarray):
        arr = vectors.astype(float)
    else:
        arr = np.asarray(
            [v.values if isinstance(v, FeatureVector) else v for v in vectors], dtype=float
        )
    if arr.size == 0:
        return arr.reshape(0, 0)
    if arr.ndim != 2:
        arr = arr.reshape(len(arr), -1)
    return arr
