"""Atomic-fact factual consistency scoring for summaries."""

from .analysis import auc, pca, pearson_matrix, select_threshold, threshold_metrics
from .backend import (
    BackendRequest,
    CachedBackend,
    HeuristicBackend,
    RemoteBackend,
    TokenDistribution,
    heuristic_pair_score,
    yes_probability,
)
from .classifier import (
    NbModel,
    classify_fact,
    judge_summary,
    posterior_factual,
    posterior_not_factual,
    train,
)
from .core import (
    CATEGORY_ORDER,
    AtomicFact,
    FactLabel,
    FactSet,
    FactualityCategory,
    FeatureVector,
    Verdict,
    category_question,
)
from .dataset import BenchRecord, SamplePlan, load_benchmark, sample, split_by_cut
from .facts import extract_facts, load_manual_facts
from .scoring import ScoreMatrix, aggregate_features, score_pairs

__all__ = [
    "aggregate_features",
    "AtomicFact",
    "auc",
    "BackendRequest",
    "BenchRecord",
    "CachedBackend",
    "CATEGORY_ORDER",
    "category_question",
    "classify_fact",
    "extract_facts",
    "FactLabel",
    "FactSet",
    "FactualityCategory",
    "FeatureVector",
    "heuristic_pair_score",
    "HeuristicBackend",
    "judge_summary",
    "load_benchmark",
    "load_manual_facts",
    "NbModel",
    "pca",
    "pearson_matrix",
    "posterior_factual",
    "posterior_not_factual",
    "RemoteBackend",
    "sample",
    "SamplePlan",
    "score_pairs",
    "ScoreMatrix",
    "select_threshold",
    "split_by_cut",
    "threshold_metrics",
    "TokenDistribution",
    "train",
    "Verdict",
    "yes_probability",
]

__version__ = "0.1.0"
