"""End-to-end commands.  Each ``cmd_*`` reads its inputs from a :class:`RunConfig`,
writes exactly one output file atomically, validates it, and returns its path."""

from __future__ import annotations

import logging
import os
import sys
import warnings
from collections import OrderedDict
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any

from . import analysis, classifier, schemas
from .backend import make_backend
from .core import CATEGORY_NAMES, FeatureVector
from .dataset import SamplePlan, dumps_benchmark, load_benchmark, sample, write_benchmark
from .errors import FactgateError, InsufficientData, OneClassOnly, SingleClassTraining
from .facts import DocFacts, dumps_facts, facts_for_record, load_manual_facts, lookup
from .io_utils import atomic_write_text, dumps_json, dumps_jsonl, read_jsonl
from .scoring import aggregate_all, score_pairs
from .synthetic import SyntheticSpec, generate

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    backend: str = "heuristic"
    model_id: str | None = None
    api_url: str | None = None
    data_path: Path | None = None
    facts_path: Path | None = None
    cache_path: Path | None = None
    scores_path: Path | None = None
    model_path: Path | None = None
    out_path: Path | None = None
    sample: SamplePlan | None = None
    nb: str = "gaussian"
    threshold_objective: str = "accuracy"
    concurrency_limit: int = 1
    pca_k: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.backend not in ("remote", "heuristic"):
            raise ValueError(f"backend must be remote or heuristic, got {self.backend!r}")
        if self.nb not in ("gaussian", "bernoulli"):
            raise ValueError(f"nb must be gaussian or bernoulli, got {self.nb!r}")
        if self.threshold_objective not in analysis.OBJECTIVES:
            raise ValueError(f"threshold_objective must be one of {analysis.OBJECTIVES}")
        if self.concurrency_limit < 1:
            raise ValueError("concurrency_limit must be >= 1")
        for f in fields(self):
            if f.name.endswith("_path") and isinstance(getattr(self, f.name), str):
                setattr(self, f.name, Path(getattr(self, f.name)))

    @classmethod
    def from_toml(cls, path: str | os.PathLike, **overrides: Any) -> "RunConfig":
        """Load a TOML config; keyword overrides (from CLI flags) win over file values."""
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
        return cls.from_mapping({**raw, **{k: v for k, v in overrides.items() if v is not None}})

    @classmethod
    def from_mapping(cls, raw: dict) -> "RunConfig":
        raw = dict(raw)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        if isinstance(raw.get("sample"), dict):
            raw["sample"] = SamplePlan(**raw["sample"])
        return cls(**raw)


def _require(path: Path | None, what: str) -> Path:
    if path is None:
        raise FactgateError(f"no {what} path configured")
    return path


def _records(config: RunConfig):
    data = _require(config.data_path, "data")
    if not data.exists():
        raise FactgateError(f"data file not found: {data}")
    records = load_benchmark(data)
    if config.sample is not None:
        records = sample(records, config.sample)
    return records


def _backend(config: RunConfig):
    return make_backend(config.backend, config.model_id, config.cache_path, config.api_url)


def _existing_facts(config: RunConfig) -> "OrderedDict[str, DocFacts]":
    path = config.facts_path
    if path is None or not path.exists():
        return OrderedDict()
    return OrderedDict((d.doc_id, d) for d in load_manual_facts(path))


# ---------------------------------------------------------------------------


def cmd_sample(config: RunConfig) -> Path:
    """Write a seeded sample of the benchmark in the benchmark's own format."""
    out = _require(config.out_path, "output")
    plan = config.sample or SamplePlan(seed=config.seed)
    records = sample(load_benchmark(_require(config.data_path, "data")), plan)
    write_benchmark(records, out)
    load_benchmark(out)
    return out


def cmd_generate(config: RunConfig, spec: SyntheticSpec, out_dir: str | os.PathLike) -> tuple[Path, Path]:
    """Write ``bench.csv`` and ``facts.jsonl`` for a synthetic corpus."""
    out_dir = Path(out_dir)
    records, facts = generate(spec)
    bench, facts_path = out_dir / "bench.csv", out_dir / "facts.jsonl"
    atomic_write_text(bench, dumps_benchmark(records, "csv"))
    atomic_write_text(facts_path, dumps_facts(facts))
    load_benchmark(bench)
    schemas.validate_jsonl_file(facts_path, schemas.FACTS_LINE)
    return bench, facts_path


def cmd_extract_facts(config: RunConfig, backend=None) -> Path:
    """Extend the facts file with backend-extracted facts for records that lack them.

    Existing entries are kept untouched; if nothing is missing the file is not rewritten.
    """
    out = _require(config.facts_path, "facts")
    records = _records(config)
    if backend is None:
        backend = _backend(config)
    docs = _existing_facts(config)
    added = 0
    for r in records:
        if lookup(docs, r) is not None:
            continue
        try:
            docs[r.key] = facts_for_record(r, {}, backend)
        except FactgateError as exc:
            raise FactgateError(f"{r.key}: {exc}") from exc
        added += 1
    if added or not out.exists():
        atomic_write_text(out, dumps_facts(list(docs.values())))
    schemas.validate_jsonl_file(out, schemas.FACTS_LINE, allow_empty=True)
    log.info("extract-facts: %d new, %d total", added, len(docs))
    return out


def score_records(records, facts_by_id, backend, concurrency: int = 1) -> list[dict]:
    lines = []
    for r in records:
        doc = facts_for_record(r, facts_by_id, backend)
        matrix = score_pairs(doc.summary, doc.source, backend, concurrency, doc_id=r.key)
        for i, vec in enumerate(aggregate_all(matrix)):
            lines.append(
                {
                    "doc_id": r.key,
                    "dataset": r.dataset_name,
                    "cut": r.cut,
                    "label": r.label,
                    "summary_idx": i,
                    "summary_fact": doc.summary.facts[i].text,
                    "features": vec.to_dict(),
                    "pairs": matrix.pairs_for(i),
                }
            )
    return lines


def cmd_score(config: RunConfig, backend=None) -> Path:
    out = _require(config.scores_path, "scores")
    records = _records(config)
    if backend is None:
        backend = _backend(config)
    lines = score_records(records, _existing_facts(config), backend, config.concurrency_limit)
    atomic_write_text(out, dumps_jsonl(lines))
    schemas.validate_jsonl_file(out, schemas.SCORE_LINE)
    return out


def load_scores(path: str | os.PathLike) -> list[dict]:
    return read_jsonl(path)


def group_by_doc(lines: list[dict]) -> "OrderedDict[str, list[dict]]":
    groups: OrderedDict[str, list[dict]] = OrderedDict()
    for line in lines:
        groups.setdefault(line["doc_id"], []).append(line)
    for doc_lines in groups.values():
        doc_lines.sort(key=lambda ln: ln["summary_idx"])
    return groups


def _vector(line: dict) -> FeatureVector:
    return FeatureVector.from_dict(line["features"])


def train_from_scores(lines: list[dict], nb: str = "gaussian"):
    """Fit on cut=val lines only; each summary fact inherits its summary's label."""
    val = [ln for ln in lines if ln["cut"] == "val" and ln["label"] is not None]
    if not val:
        raise SingleClassTraining("no labeled val records to train on")
    X = [_vector(ln) for ln in val]
    y = [ln["label"] for ln in val]
    if nb == "bernoulli":
        return classifier.train_bernoulli(X, y)
    return classifier.train(X, y)


def cmd_train(config: RunConfig) -> Path:
    out = _require(config.model_path, "model")
    model = train_from_scores(load_scores(_require(config.scores_path, "scores")), config.nb)
    classifier.save_model(model, out)
    schemas.validate_json_file(out, schemas.MODEL)
    classifier.load_model(out)
    return out


def verdicts(model, lines: list[dict]) -> "OrderedDict[str, tuple[dict, Any]]":
    out: OrderedDict[str, tuple[dict, Any]] = OrderedDict()
    for doc_id, doc_lines in group_by_doc(lines).items():
        v = classifier.judge_summary(model, [_vector(ln) for ln in doc_lines])
        out[doc_id] = (doc_lines[0], v)
    return out


def cmd_predict(config: RunConfig) -> Path:
    out = _require(config.out_path, "output")
    model = classifier.load_model(_require(config.model_path, "model"))
    rows = []
    for doc_id, (meta, v) in verdicts(model, load_scores(_require(config.scores_path, "scores"))).items():
        rows.append({"doc_id": doc_id, "dataset": meta["dataset"], "cut": meta["cut"],
                     "label": meta["label"], **v.to_dict()})
    atomic_write_text(out, dumps_jsonl(rows))
    schemas.validate_jsonl_file(out, schemas.PREDICTION_LINE)
    return out


def evaluate_verdicts(summary_rows: list[tuple[str, str, int, float]], objective: str) -> analysis.EvalReport:
    """``summary_rows`` are (dataset, cut, label, summary_score).

    The headline threshold is tuned on all val rows.  Each dataset gets its own
    threshold from its val rows when they contain both classes, else the headline one.
    """
    val = [(d, y, s) for d, c, y, s in summary_rows if c == "val" and y is not None]
    test = [(d, y, s) for d, c, y, s in summary_rows if c == "test" and y is not None]
    if not test:
        raise OneClassOnly("no labeled test records to evaluate")
    if not val:
        raise OneClassOnly("no labeled val records to tune a threshold on")
    threshold = analysis.select_threshold([s for _, _, s in val], [y for _, y, _ in val], objective)
    overall = analysis.evaluate_scores([s for _, _, s in test], [y for _, y, _ in test], threshold)

    per_dataset = {}
    for name in sorted({d for d, _, _ in test}):
        dv = [(y, s) for d, y, s in val if d == name]
        dt = [(y, s) for d, y, s in test if d == name]
        t = threshold
        if dv and len({y for y, _ in dv}) == 2:
            t = analysis.select_threshold([s for _, s in dv], [y for y, _ in dv], objective)
        labels = [y for y, _ in dt]
        scores = [s for _, s in dt]
        a = analysis.auc(scores, labels) if len(set(labels)) == 2 else None
        acc, f1, prec = analysis.metrics_from_confusion(*analysis.confusion(scores, labels, t))
        per_dataset[name] = analysis.Metrics(a, acc, f1, prec, t, len(dt))
    return analysis.EvalReport(
        overall.auc, overall.accuracy, overall.f1, overall.precision, threshold, overall.n_examples, per_dataset
    )


def cmd_evaluate(config: RunConfig) -> Path:
    out = _require(config.out_path, "output")
    model = classifier.load_model(_require(config.model_path, "model"))
    rows = [
        (meta["dataset"], meta["cut"], meta["label"], v.summary_score)
        for meta, v in verdicts(model, load_scores(_require(config.scores_path, "scores"))).values()
    ]
    report = evaluate_verdicts(rows, config.threshold_objective)
    atomic_write_text(out, dumps_json(report.to_dict()))
    schemas.validate_json_file(out, schemas.REPORT)
    return out


def diagnose(lines: list[dict], k: int = 8) -> dict:
    vectors = [_vector(ln) for ln in lines]
    if len(vectors) < 2:
        raise InsufficientData("diagnostics need at least 2 scored summary facts")
    with warnings.catch_warnings():
        # reported in the output file and the log instead
        warnings.simplefilter("ignore", RuntimeWarning)
        corr = analysis.pearson_matrix(vectors)
    result = analysis.pca(vectors, k)
    flat = [CATEGORY_NAMES[i] for i in range(len(CATEGORY_NAMES)) if corr[i, i] == 0.0]
    if flat:
        log.warning("zero-variance features, correlations reported as 0: %s", ", ".join(flat))
    return {
        "feature_order": list(CATEGORY_NAMES),
        "n_vectors": len(vectors),
        "zero_variance_features": flat,
        "correlation": corr.tolist(),
        "pca": result.to_dict(),
    }


def cmd_diagnose(config: RunConfig) -> Path:
    out = _require(config.out_path, "output")
    diag = diagnose(load_scores(_require(config.scores_path, "scores")), config.pca_k)
    atomic_write_text(out, dumps_json(diag))
    schemas.validate_json_file(out, schemas.DIAGNOSTICS)
    return out
