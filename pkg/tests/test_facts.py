import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from factgate.backend import BackendRequest, HeuristicBackend, TokenDistribution
from factgate.core import FactSet, Origin, Provenance
from factgate.dataset import BenchRecord
from factgate.errors import DuplicateDocId, MalformedLine, NoFactsParsed, UnknownDocId
from factgate.facts import (
    DocFacts,
    dumps_facts,
    extract_facts,
    facts_for_record,
    load_manual_facts,
    parse_fact_lines,
    write_facts,
)
from factgate.prompts import DECOMPOSITION_TEMPLATE, decomposition_prompt

FAA_TEXT = (
    "The Federal Aviation Administration on Wednesday initially reported a pressurization problem "
    "with SkyWest Flight 5622, and said it would investigate. It later issued a statement that did "
    "not reference any pressurization issues."
)
FAA_FACTS = [
    "The Federal Aviation Administration reported a pressurization problem with SkyWest Flight 5622.",
    "The FAA reported the pressurization problem on Wednesday.",
    "The FAA said it would investigate.",
    "The FAA later issued a statement that did not reference any pressurization issues.",
]


class CannedBackend:
    backend_id, model_id = "canned", "canned"

    def __init__(self, text):
        self.text = text
        self.prompts = []

    def query(self, request: BackendRequest):
        self.prompts.append(request.prompt)
        return TokenDistribution((("-", 0.0),), self.text)


def test_decomposition_template_exact():
    assert DECOMPOSITION_TEMPLATE == (
        "Break the following text into independent atomic facts. Output one fact per line, "
        "each line starting with '- '.\n\nText: {TEXT}\n\nFacts:\n"
    )
    assert decomposition_prompt("A {b}.").endswith("Text: A {b}.\n\nFacts:\n")


def test_extract_faa_passage():
    backend = CannedBackend("".join(f"- {f}\n" for f in FAA_FACTS))
    fs = extract_facts(FAA_TEXT, "source", backend, "faa")
    assert fs.texts == FAA_FACTS
    assert "The FAA said it would investigate." in fs.texts
    assert [f.index for f in fs.facts] == [0, 1, 2, 3]
    assert all(f.provenance is Provenance.BACKEND for f in fs.facts)
    assert backend.prompts == [decomposition_prompt(FAA_TEXT)]


def test_extract_single_sentence_heuristic():
    fs = extract_facts("Barrow won the match.", Origin.SUMMARY, HeuristicBackend())
    assert fs.texts == ["Barrow won the match."]


def test_interleaved_blank_lines_ignored():
    plain = "- one\n- two\n- three\n"
    spaced = "\n- one\n\n\n- two\n   \n- three\n\n"
    assert parse_fact_lines(plain) == parse_fact_lines(spaced) == ["one", "two", "three"]


def test_non_bullet_lines_dropped():
    assert parse_fact_lines("Here are the facts:\n- a\n* b\n-c\n-   \n- d ") == ["a", "d"]


def test_no_facts_parsed():
    with pytest.raises(NoFactsParsed):
        extract_facts("text", "source", CannedBackend("Sorry, I cannot help."))


@given(st.lists(st.text(st.characters(blacklist_categories=("Cs", "Zl", "Zp", "Cc")), min_size=1)
                .map(str.strip).filter(bool), max_size=6))
def test_parse_idempotent(facts):
    once = parse_fact_lines("".join(f"- {f}\n" for f in facts))
    assert once == facts
    assert parse_fact_lines("".join(f"- {f}\n" for f in once)) == once


def test_heuristic_extraction_equals_sentence_split():
    text = "Barrow won. Williams scored! Did Yates score? Yes."
    fs = extract_facts(text, "source", HeuristicBackend())
    assert fs.texts == ["Barrow won.", "Williams scored!", "Did Yates score?", "Yes."]


def _line(doc_id, src, summ):
    return json.dumps({"doc_id": doc_id, "source_facts": src, "summary_facts": summ})


def test_load_manual_two_summary_facts(tmp_path):
    p = tmp_path / "f.jsonl"
    p.write_text(_line("d1", ["s1.", "s2.", "s3."], ["a.", "b."]) + "\n")
    (doc,) = load_manual_facts(p)
    assert len(doc.summary) == 2 and len(doc.source) == 3
    assert doc.summary.facts[1].origin is Origin.SUMMARY


def test_duplicate_doc_id(tmp_path):
    p = tmp_path / "f.jsonl"
    p.write_text(_line("d1", ["s"], ["a"]) + "\n" + _line("d1", ["s"], ["b"]) + "\n")
    with pytest.raises(DuplicateDocId):
        load_manual_facts(p)


@pytest.mark.parametrize(
    "line",
    ["not json", "[]", json.dumps({"source_facts": ["a"], "summary_facts": ["b"]}),
     _line("d", [], ["b"]), _line("d", ["a"], [""]), _line("d", ["a"], [3])],
)
def test_malformed_lines(tmp_path, line):
    p = tmp_path / "f.jsonl"
    p.write_text(_line("ok", ["a"], ["b"]) + "\n" + line + "\n")
    with pytest.raises(MalformedLine) as exc:
        load_manual_facts(p)
    assert exc.value.line_no == 2


def test_cross_check_known_ids(tmp_path):
    p = tmp_path / "f.jsonl"
    p.write_text(_line("d1", ["a"], ["b"]) + "\n")
    assert load_manual_facts(p, known_ids={"d1"})
    with pytest.raises(UnknownDocId):
        load_manual_facts(p, known_ids={"d2"})


def test_roundtrip_write_read(tmp_path):
    docs = [
        DocFacts("x#m", FactSet.from_texts("x#m", "source", ["α fact.", 'quote " fact']),
                 FactSet.from_texts("x#m", "summary", ["one"])),
        DocFacts("y", FactSet.from_texts("y", "source", ["s"]),
                 FactSet.from_texts("y", "summary", ["t", "u"])),
    ]
    p = tmp_path / "f.jsonl"
    write_facts(docs, p)
    assert load_manual_facts(p) == docs
    assert dumps_facts(load_manual_facts(p)) == p.read_text()


def test_manual_facts_take_precedence():
    r = BenchRecord("D", "xsum", "7", "Doc one. Doc two.", "Summary.", "m", 1, "val")
    manual = DocFacts("7", FactSet.from_texts("7", "source", ["hand fact"]),
                      FactSet.from_texts("7", "summary", ["hand summary"]))
    backend = CannedBackend("- should not be used\n")
    assert facts_for_record(r, {"7": manual}, backend) is manual
    assert backend.prompts == []
    extracted = facts_for_record(r, {}, HeuristicBackend())
    assert extracted.source.texts == ["Doc one.", "Doc two."]
    assert extracted.doc_id == "7#m"
