"""Atomic facts: backend-driven extraction and manually authored fact files."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .backend import BackendRequest
from .core import FactSet, Origin, Provenance
from .errors import DuplicateDocId, MalformedLine, NoFactsParsed, UnknownDocId
from .io_utils import atomic_write_text
from .prompts import decomposition_prompt

EXTRACTION_MAX_TOKENS = 512


def parse_fact_lines(response: str) -> list[str]:
    """Facts from a '- '-bulleted completion; non-bullet and blank lines are dropped."""
    facts = []
    for line in response.splitlines():
        line = line.strip()
        if not line.startswith("- "):
            continue
        text = line[2:].strip()
        if text:
            facts.append(text)
    return facts


def extract_facts(text: str, origin: Origin | str, backend, doc_id: str = "") -> FactSet:
    if not text.strip():
        raise ValueError("cannot extract facts from empty text")
    request = BackendRequest(decomposition_prompt(text), max_tokens=EXTRACTION_MAX_TOKENS)
    dist = backend.query(request)
    lines = parse_fact_lines(dist.fallback_text)
    if not lines:
        raise NoFactsParsed(f"{doc_id or '<text>'}: backend returned no '- ' fact lines")
    return FactSet.from_texts(doc_id, origin, lines, Provenance.BACKEND)


@dataclass(frozen=True)
class DocFacts:
    """Source and summary facts for one benchmark record."""

    doc_id: str
    source: FactSet
    summary: FactSet

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "source_facts": self.source.texts,
            "summary_facts": self.summary.texts,
        }


def _string_list(obj, field: str, line_no: int) -> list[str]:
    value = obj.get(field)
    if not isinstance(value, list) or not value:
        raise MalformedLine(line_no, f"{field!r} must be a non-empty list of strings")
    for item in value:
        if not isinstance(item, str) or not item.strip():
            raise MalformedLine(line_no, f"{field!r} contains an empty or non-string fact")
    return value


def parse_manual_facts(text: str, provenance: Provenance = Provenance.MANUAL) -> list[DocFacts]:
    out: list[DocFacts] = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedLine(line_no, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise MalformedLine(line_no, "expected a JSON object")
        doc_id = obj.get("doc_id")
        if not isinstance(doc_id, str) or not doc_id:
            raise MalformedLine(line_no, "'doc_id' must be a non-empty string")
        if doc_id in seen:
            raise DuplicateDocId(doc_id)
        seen.add(doc_id)
        src = _string_list(obj, "source_facts", line_no)
        summ = _string_list(obj, "summary_facts", line_no)
        prov = Provenance(obj.get("provenance", provenance.value))
        out.append(
            DocFacts(
                doc_id,
                FactSet.from_texts(doc_id, Origin.SOURCE, src, prov),
                FactSet.from_texts(doc_id, Origin.SUMMARY, summ, prov),
            )
        )
    return out


def load_manual_facts(
    path: str | os.PathLike, known_ids: Iterable[str] | None = None
) -> list[DocFacts]:
    """Parse a facts JSONL file.

    Each line is ``{"doc_id": str, "source_facts": [...], "summary_facts": [...]}``.
    With ``known_ids`` every doc_id must name a benchmark record.
    """
    with open(path, encoding="utf-8") as fh:
        docs = parse_manual_facts(fh.read())
    if known_ids is not None:
        known = set(known_ids)
        unknown = [d.doc_id for d in docs if d.doc_id not in known]
        if unknown:
            raise UnknownDocId(f"facts for unknown doc_id(s): {', '.join(unknown[:5])}")
    return docs


def dumps_facts(docs: Sequence[DocFacts]) -> str:
    lines = []
    for d in docs:
        obj = d.to_dict()
        if d.summary.facts and d.summary.facts[0].provenance is Provenance.BACKEND:
            obj["provenance"] = Provenance.BACKEND.value
        lines.append(json.dumps(obj, ensure_ascii=False))
    return "".join(line + "\n" for line in lines)


def write_facts(docs: Sequence[DocFacts], path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps_facts(docs))


def lookup(facts_by_id: Mapping[str, DocFacts], record) -> DocFacts | None:
    """Facts for a benchmark record: by its composite key first, then by bare doc id."""
    return facts_by_id.get(record.key) or facts_by_id.get(record.doc_id)


def facts_for_record(record, facts_by_id: Mapping[str, DocFacts], backend) -> DocFacts:
    """Manual facts win; otherwise both sides are extracted through ``backend``."""
    found = lookup(facts_by_id, record)
    if found is not None:
        return found
    return DocFacts(
        record.key,
        extract_facts(record.doc, Origin.SOURCE, backend, record.key),
        extract_facts(record.summary, Origin.SUMMARY, backend, record.key),
    )
