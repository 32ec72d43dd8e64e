"""AggreFact-format benchmark files: loading, writing, sampling and val/test splits."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import EmptyDataset, MalformedRow, MissingCut
from .io_utils import atomic_write_text
from .rng import SplitMix64

REQUIRED_COLUMNS = ("dataset", "origin", "id", "doc", "summary", "model_name", "label", "cut")
ORIGINS = ("cnndm", "xsum")
CUTS = ("val", "test")

# Column spellings seen in the wild for the same field.
_ALIASES = {"model name": "model_name", "model": "model_name"}


@dataclass(frozen=True)
class BenchRecord:
    dataset_name: str
    origin: str
    doc_id: str
    doc: str
    summary: str
    model_name: str
    label: int | None
    cut: str | None
    system_scores: dict[str, float] = field(default_factory=dict)
    system_labels: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.doc.strip():
            raise ValueError(f"{self.doc_id}: empty doc")
        if not self.summary.strip():
            raise ValueError(f"{self.doc_id}: empty summary")
        if self.label not in (None, 0, 1):
            raise ValueError(f"{self.doc_id}: label must be 0 or 1, got {self.label!r}")
        if self.origin not in ORIGINS:
            raise ValueError(f"{self.doc_id}: origin must be one of {ORIGINS}, got {self.origin!r}")
        if self.cut not in (None, *CUTS):
            raise ValueError(f"{self.doc_id}: cut must be one of {CUTS}, got {self.cut!r}")

    @property
    def key(self) -> str:
        """Identifier for this (document, summary) pair.

        AggreFact repeats a document id once per summarization model, so the
        model name is part of the key.
        """
        return f"{self.doc_id}#{self.model_name}" if self.model_name else self.doc_id


@dataclass(frozen=True)
class SamplePlan:
    n: int = 70
    seed: int = 0
    stratify_by_label: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("sample size must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _split_system_column(name: str) -> tuple[str, str] | None:
    for suffix in (" score", "_score", " label", "_label"):
        if name.endswith(suffix) and len(name) > len(suffix):
            return name[: -len(suffix)], suffix[1:]
    return None


def _parse_label(raw, line: int, column: str) -> int | None:
    if raw is None:
        return None
    if isinstance(raw, bool):
        raise MalformedRow(line, f"{column}: boolean is not a label")
    if isinstance(raw, (int, float)):
        if raw in (0, 1):
            return int(raw)
        raise MalformedRow(line, f"{column}: label must be 0 or 1, got {raw!r}")
    text = str(raw).strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(line, f"{column}: label must be 0 or 1, got {text!r}") from None
    if value not in (0.0, 1.0):
        raise MalformedRow(line, f"{column}: label must be 0 or 1, got {text!r}")
    return int(value)


def _parse_score(raw, line: int, column: str) -> float | None:
    if raw is None or (isinstance(raw, str) and raw.strip() == ""):
        return None
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise MalformedRow(line, f"{column}: not a number: {raw!r}") from None


def _record_from_row(row: dict, line: int) -> BenchRecord:
    row = {_ALIASES.get(k, k): v for k, v in row.items() if k is not None}
    missing = [c for c in REQUIRED_COLUMNS if c not in row]
    if missing:
        raise MalformedRow(line, f"missing required column(s): {', '.join(missing)}")

    scores: dict[str, float] = {}
    labels: dict[str, int] = {}
    for col, raw in row.items():
        if col in REQUIRED_COLUMNS:
            continue
        split = _split_system_column(col)
        if split is None:
            continue
        name, kind = split
        if kind == "score":
            val = _parse_score(raw, line, col)
            if val is not None:
                scores[name] = val
        else:
            lab = _parse_label(raw, line, col)
            if lab is not None:
                labels[name] = lab

    cut = row["cut"]
    cut = None if cut is None or str(cut).strip() == "" else str(cut).strip()
    try:
        return BenchRecord(
            dataset_name=str(row["dataset"]),
            origin=str(row["origin"]).strip(),
            doc_id=str(row["id"]),
            doc=str(row["doc"]),
            summary=str(row["summary"]),
            model_name=str(row["model_name"]),
            label=_parse_label(row["label"], line, "label"),
            cut=cut,
            system_scores=scores,
            system_labels=labels,
        )
    except ValueError as exc:
        raise MalformedRow(line, str(exc)) from None


def _detect_format(path: Path) -> str:
    return "jsonl" if path.suffix.lower() in (".jsonl", ".ndjson") else "csv"


def load_benchmark(path: str | os.PathLike, format: str | None = None) -> list[BenchRecord]:
    """Read a benchmark file (CSV with a header row, or JSONL) into records.

    ``format`` is inferred from the file extension when omitted.  Columns named
    ``"<system> score"`` / ``"<system> label"`` (or with an underscore) are kept
    in ``system_scores`` / ``system_labels``; other unknown columns are ignored.
    Line numbers in errors are 1-based physical lines for JSONL and the line
    where the row starts for CSV.
    """
    path = Path(path)
    fmt = format or _detect_format(path)
    # OSError propagates as the I/O error
    text = path.read_text(encoding="utf-8")
    if fmt == "csv":
        return _load_csv(text)
    if fmt == "jsonl":
        return _load_jsonl(text)
    raise ValueError(f"unknown benchmark format {fmt!r}")


def _load_csv(text: str) -> list[BenchRecord]:
    reader = csv.DictReader(io.StringIO(text, newline=""), restval="")
    if reader.fieldnames is None:
        return []
    header = [_ALIASES.get(c, c) for c in reader.fieldnames]
    missing = [c for c in REQUIRED_COLUMNS if c not in header]
    if missing:
        raise MalformedRow(1, f"missing required column(s): {', '.join(missing)}")
    records = []
    line = reader.line_num + 1
    for row in reader:
        if None in row:
            raise MalformedRow(line, "more fields than header columns")
        records.append(_record_from_row(row, line))
        line = reader.line_num + 1
    return records


def _load_jsonl(text: str) -> list[BenchRecord]:
    records = []
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRow(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedRow(line_no, "expected a JSON object")
        records.append(_record_from_row(obj, line_no))
    return records


def _system_names(records: Sequence[BenchRecord]) -> list[str]:
    names: list[str] = []
    for r in records:
        for name in (*r.system_scores, *r.system_labels):
            if name not in names:
                names.append(name)
    return names


def dumps_benchmark(records: Sequence[BenchRecord], format: str = "csv") -> str:
    systems = _system_names(records)
    if format == "jsonl":
        lines = []
        for r in records:
            obj = {
                "dataset": r.dataset_name,
                "origin": r.origin,
                "id": r.doc_id,
                "doc": r.doc,
                "summary": r.summary,
                "model_name": r.model_name,
                "label": r.label,
                "cut": r.cut,
            }
            for name in systems:
                if name in r.system_scores:
                    obj[f"{name}_score"] = r.system_scores[name]
                if name in r.system_labels:
                    obj[f"{name}_label"] = r.system_labels[name]
            lines.append(json.dumps(obj, ensure_ascii=False))
        return "".join(line + "\n" for line in lines)
    if format != "csv":
        raise ValueError(f"unknown benchmark format {format!r}")

    header = list(REQUIRED_COLUMNS)
    for name in systems:
        header += [f"{name} score", f"{name} label"]
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in records:
        row = [
            r.dataset_name,
            r.origin,
            r.doc_id,
            r.doc,
            r.summary,
            r.model_name,
            "" if r.label is None else r.label,
            r.cut or "",
        ]
        for name in systems:
            row.append(repr(r.system_scores[name]) if name in r.system_scores else "")
            row.append(r.system_labels.get(name, ""))
        writer.writerow(row)
    return buf.getvalue()


def write_benchmark(
    records: Sequence[BenchRecord], path: str | os.PathLike, format: str | None = None
) -> None:
    path = Path(path)
    atomic_write_text(path, dumps_benchmark(records, format or _detect_format(path)))


def sample(records: Sequence[BenchRecord], plan: SamplePlan) -> list[BenchRecord]:
    """Seeded draw of ``min(plan.n, len(records))`` records without replacement.

    The selection is returned in the input order.  With ``stratify_by_label``
    each label (and the unlabeled group, if any) gets a quota proportional to
    its population share, rounded by largest remainder.
    """
    if not records:
        raise EmptyDataset("cannot sample from an empty record list")
    if plan.n >= len(records):
        return list(records)

    rng = SplitMix64(plan.seed)
    if not plan.stratify_by_label:
        chosen = rng.sample_indices(len(records), plan.n)
        return [records[i] for i in sorted(chosen)]

    groups: dict[int | None, list[int]] = {}
    for i, r in enumerate(records):
        groups.setdefault(r.label, []).append(i)
    order = sorted(groups, key=lambda k: (k is None, k))
    exact = {k: plan.n * len(groups[k]) / len(records) for k in order}
    quota = {k: math.floor(exact[k]) for k in order}
    leftover = plan.n - sum(quota.values())
    by_remainder = sorted(order, key=lambda k: (-(exact[k] - quota[k]), order.index(k)))
    for k in by_remainder[:leftover]:
        quota[k] += 1

    chosen = []
    for k in order:
        members = groups[k]
        chosen += [members[j] for j in rng.sample_indices(len(members), quota[k])]
    return [records[i] for i in sorted(chosen)]


def split_by_cut(records: Iterable[BenchRecord]) -> tuple[list[BenchRecord], list[BenchRecord]]:
    val, test = [], []
    for r in records:
        if r.cut == "val":
            val.append(r)
        elif r.cut == "test":
            test.append(r)
        else:
            raise MissingCut(r.doc_id)
    return val, test


def bundled_sample_path() -> Path:
    """Path of the packaged one-row AggreFact-format fixture (XSumFaith doc 34687720)."""
    from importlib.resources import files

    return Path(str(files("factgate") / "data" / "aggrefact_sample.csv"))
