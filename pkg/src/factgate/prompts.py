"""Prompt templates shared by the fact extractor, the pair scorer and the heuristic backend."""

from __future__ import annotations

import re

from .core import FactualityCategory, category_from_question

DECOMPOSITION_TEMPLATE = (
    "Break the following text into independent atomic facts. "
    "Output one fact per line, each line starting with '- '.\n\nText: {TEXT}\n\nFacts:\n"
)

PAIR_TEMPLATE = "Source statement: {SOURCE_FACT}\nSummary statement: {SUMMARY_FACT}\nQuestion: {CATEGORY_QUESTION}\nAnswer:"

_DECOMP_PREFIX, _DECOMP_SUFFIX = DECOMPOSITION_TEMPLATE.split("{TEXT}")
_PAIR_RE = re.compile(
    r"\ASource statement: (?P<source>.*)\nSummary statement: (?P<summary>.*)\n"
    r"Question: (?P<question>[^\n]*)\nAnswer:\Z",
    re.DOTALL,
)


def decomposition_prompt(text: str) -> str:
    # str.replace, not format(): document text may contain braces
    return DECOMPOSITION_TEMPLATE.replace("{TEXT}", text)


def pair_prompt(source_fact: str, summary_fact: str, cat: FactualityCategory) -> str:
    return (
        f"Source statement: {source_fact}\nSummary statement: {summary_fact}\n"
        f"Question: {FactualityCategory(cat).question}\nAnswer:"
    )


def parse_decomposition_prompt(prompt: str) -> str | None:
    if prompt.startswith(_DECOMP_PREFIX) and prompt.endswith(_DECOMP_SUFFIX):
        return prompt[len(_DECOMP_PREFIX) : len(prompt) - len(_DECOMP_SUFFIX)]
    return None


def parse_pair_prompt(prompt: str) -> tuple[str, str, FactualityCategory] | None:
    """Inverse of :func:`pair_prompt`: (source_fact, summary_fact, category) or None."""
    m = _PAIR_RE.match(prompt)
    if m is None:
        return None
    try:
        cat = category_from_question(m["question"])
    except KeyError:
        return None
    return m["source"], m["summary"], cat
