"""Scoring backends.

Every backend answers a :class:`BackendRequest` with the distribution over the
first generated token.  Three implementations live here:

* :class:`HeuristicBackend` -- deterministic, offline, token-overlap rules.
* :class:`RemoteBackend` -- OpenAI-compatible ``/completions`` endpoint.
* :class:`CachedBackend` -- wraps either one with an append-only JSONL cache.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
import threading
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

import httpx

from .core import FactualityCategory
from .errors import (
    AuthError,
    BackendError,
    EmptyText,
    NoDecisionToken,
    RateLimited,
    TransportError,
    UnparseableResponse,
)
from .prompts import parse_decomposition_prompt, parse_pair_prompt

log = logging.getLogger(__name__)

API_KEY_ENV = "FACTGATE_API_KEY"
API_URL_ENV = "FACTGATE_API_URL"

FALLBACK_YES = 0.99
FALLBACK_NO = 0.01
_MIN_DECISION_MASS = 1e-9


@dataclass(frozen=True)
class BackendRequest:
    prompt: str
    want_top_logprobs: int = 20
    max_tokens: int = 1
    temperature: float = 0.0

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.want_top_logprobs < 5:
            raise ValueError("want_top_logprobs must be >= 5")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


@dataclass(frozen=True)
class TokenDistribution:
    """Top-k (token, logprob) pairs for the first generated token.

    ``fallback_text`` is the text the model actually generated; for
    multi-token requests it holds the whole completion.
    """

    entries: tuple[tuple[str, float], ...]
    fallback_text: str = ""

    def __post_init__(self):
        entries = tuple(sorted(((str(t), float(lp)) for t, lp in self.entries), key=lambda e: -e[1]))
        for tok, lp in entries:
            if not lp <= 0.0:
                raise ValueError(f"logprob for {tok!r} must be <= 0, got {lp}")
        object.__setattr__(self, "entries", entries)

    def to_dict(self) -> dict:
        return {"entries": [list(e) for e in self.entries], "fallback_text": self.fallback_text}

    @classmethod
    def from_dict(cls, d: dict) -> "TokenDistribution":
        return cls(tuple((t, lp) for t, lp in d["entries"]), d.get("fallback_text", ""))


def yes_probability(dist: TokenDistribution) -> float:
    """P(yes) renormalised over the yes/no mass of the first token.

    Token surface forms are matched after stripping whitespace and lowercasing,
    so ``" Yes"`` and ``"yes"`` both count.  When neither carries mass the
    generated text decides: leading "yes" gives 0.99, leading "no" 0.01.
    """
    entries = dist.entries
    if entries:
        # shift by the max logprob: the ratio is unchanged and exp cannot underflow wholesale
        top = entries[0][1]
        p_yes = p_no = 0.0
        for tok, lp in entries:
            norm = tok.strip().lower()
            if norm == "yes":
                p_yes += math.exp(lp - top)
            elif norm == "no":
                p_no += math.exp(lp - top)
        if (p_yes + p_no) * math.exp(top) >= _MIN_DECISION_MASS:
            return p_yes / (p_yes + p_no)
    text = dist.fallback_text.strip().lower()
    if text.startswith("yes"):
        return FALLBACK_YES
    if text.startswith("no"):
        return FALLBACK_NO
    raise NoDecisionToken(f"no yes/no mass and undecidable fallback {dist.fallback_text!r}")


# ---------------------------------------------------------------------------
# heuristic scoring

PRONOUNS = frozenset({"he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their"})
_ALNUM = re.compile(r"[A-Za-z0-9]+")
_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


def _tokens(text: str) -> set[str]:
    return {t.lower() for t in _ALNUM.findall(text)}


def jaccard(a: str, b: str) -> float:
    ta, tb = _tokens(a), _tokens(b)
    union = ta | tb
    if not union:
        return 0.0
    return len(ta & tb) / len(union)


def heuristic_pair_score(summary_fact: str, source_fact: str, cat: FactualityCategory) -> float:
    """Token-overlap stand-in for an LLM's P(yes) on one category question.

    Tokens are alphanumeric runs; overlap is the Jaccard index of the lowercase
    token sets.  The entity check counts summary tokens that start with an
    uppercase letter (length >= 2) and whose lowercase form never occurs in
    the source fact.
    """
    if not summary_fact.strip() or not source_fact.strip():
        raise EmptyText("heuristic scoring needs two non-empty texts")
    cat = FactualityCategory(cat)
    j = jaccard(summary_fact, source_fact)
    if cat is FactualityCategory.SUPPORTED:
        return j
    if cat is FactualityCategory.OUTE:
        return 1.0 - j
    if cat is FactualityCategory.ENTE:
        caps = [t for t in _ALNUM.findall(summary_fact) if len(t) >= 2 and t[0].isupper()]
        if not caps:
            return 0.0
        src = _tokens(source_fact)
        return sum(t.lower() not in src for t in caps) / len(caps)
    if cat is FactualityCategory.COREFE:
        return 1.0 if (_tokens(summary_fact) & PRONOUNS and j < 0.5) else 0.0
    if cat is FactualityCategory.PREDE:
        return (1.0 - j) * 0.8
    if cat is FactualityCategory.CIRCE:
        return (1.0 - j) * 0.6
    if cat is FactualityCategory.LINKE:
        return (1.0 - j) * 0.4
    return 0.0  # GramE


def split_sentences(text: str) -> list[str]:
    """Split after '.', '!' or '?' followed by whitespace; whitespace runs collapse to one space."""
    flat = " ".join(text.split())
    return [s for s in (p.strip() for p in _SENTENCE_BREAK.split(flat)) if s]


def _distribution_for(p: float) -> TokenDistribution:
    entries = []
    if p > 0.0:
        entries.append(("yes", math.log(p)))
    if p < 1.0:
        entries.append(("no", math.log1p(-p)))
    return TokenDistribution(tuple(entries), "yes" if p >= 0.5 else "no")


class Backend:
    """Base class.  Subclasses implement :meth:`_query`; ``calls`` counts them."""

    backend_id = "base"

    def __init__(self, model_id: str):
        self.model_id = model_id
        self.calls = 0
        self._count_lock = threading.Lock()

    def query(self, request: BackendRequest) -> TokenDistribution:
        with self._count_lock:
            self.calls += 1
        return self._query(request)

    def _query(self, request: BackendRequest) -> TokenDistribution:
        raise NotImplementedError


class HeuristicBackend(Backend):
    """Answers pair prompts with :func:`heuristic_pair_score` and
    decomposition prompts with sentence splitting.  Pure function of the prompt."""

    backend_id = "heuristic"

    def __init__(self, model_id: str = "heuristic-v1"):
        super().__init__(model_id)

    def _query(self, request: BackendRequest) -> TokenDistribution:
        parsed = parse_pair_prompt(request.prompt)
        if parsed is not None:
            source, summary, cat = parsed
            return _distribution_for(heuristic_pair_score(summary, source, cat))
        text = parse_decomposition_prompt(request.prompt)
        if text is not None:
            body = "".join(f"- {s}\n" for s in split_sentences(text))
            return TokenDistribution((("-", 0.0),), body)
        raise UnparseableResponse(request.prompt, "heuristic backend does not understand prompt")


# ---------------------------------------------------------------------------
# remote


class RemoteBackend(Backend):
    """OpenAI-compatible text-completion client.

    Request body::

        {"model": <model_id>, "prompt": <prompt>, "max_tokens": <n>,
         "temperature": 0, "logprobs": <top_k>}

    Response fields read: ``choices[0].text`` and
    ``choices[0].logprobs.top_logprobs[0]`` (a token -> logprob mapping for the
    first generated token).  Single-token requests without that block raise
    :class:`UnparseableResponse`.
    """

    backend_id = "remote"

    def __init__(
        self,
        model_id: str,
        url: str | None = None,
        api_key: str | None = None,
        max_retries: int = 5,
        backoff_base: float = 1.0,
        backoff_cap: float = 60.0,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(model_id)
        self.url = url or os.environ.get(API_URL_ENV)
        self.api_key = api_key or os.environ.get(API_KEY_ENV)
        if not self.url:
            raise BackendError(f"no endpoint configured (set {API_URL_ENV} or pass --api-url)")
        if not self.api_key:
            raise AuthError(f"no credential configured (set {API_KEY_ENV})")
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.backoff_cap = backoff_cap
        self._client = client or httpx.Client(timeout=timeout)
        self._sleep = sleep

    def _payload(self, request: BackendRequest) -> dict:
        return {
            "model": self.model_id,
            "prompt": request.prompt,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "logprobs": request.want_top_logprobs,
        }

    def _query(self, request: BackendRequest) -> TokenDistribution:
        attempt = 0
        while True:
            try:
                return self._post_once(request)
            except (RateLimited, TransportError) as exc:
                if attempt >= self.max_retries:
                    raise
                delay = min(self.backoff_cap, self.backoff_base * 2**attempt)
                if isinstance(exc, RateLimited) and exc.retry_after is not None:
                    delay = max(delay, exc.retry_after)
                log.warning("backend attempt %d failed (%s); retrying in %.1fs", attempt + 1, exc, delay)
                self._sleep(delay)
                attempt += 1

    def _post_once(self, request: BackendRequest) -> TokenDistribution:
        try:
            resp = self._client.post(
                self.url,
                json=self._payload(request),
                headers={"Authorization": f"Bearer {self.api_key}"},
            )
        except httpx.HTTPError as exc:
            raise TransportError(str(exc)) from exc

        if resp.status_code in (401, 403):
            raise AuthError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code == 429:
            raise RateLimited(_retry_after(resp.headers.get("retry-after")))
        if resp.status_code >= 500:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        if resp.status_code >= 400:
            raise BackendError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        return parse_completion(resp.text, need_logprobs=request.max_tokens == 1)


def _retry_after(value: str | None) -> float | None:
    if value is None:
        return None
    try:
        return max(0.0, float(value))
    except ValueError:
        return None


def parse_completion(body: str, need_logprobs: bool = True) -> TokenDistribution:
    try:
        obj = json.loads(body)
        choice = obj["choices"][0]
        text = choice.get("text") or ""
    except (ValueError, KeyError, IndexError, TypeError, AttributeError):
        raise UnparseableResponse(body, "no choices[0] in response") from None
    logprobs = choice.get("logprobs")
    top = None
    if isinstance(logprobs, dict) and logprobs.get("top_logprobs"):
        top = logprobs["top_logprobs"][0]
    if not isinstance(top, dict) or not top:
        if need_logprobs:
            raise UnparseableResponse(body, "response lacks a logprobs block")
        return TokenDistribution((), text)
    try:
        entries = tuple((str(t), min(0.0, float(lp))) for t, lp in top.items())
    except (TypeError, ValueError):
        raise UnparseableResponse(body, "non-numeric logprob") from None
    return TokenDistribution(entries, text)


# ---------------------------------------------------------------------------
# cache


def cache_key(backend_id: str, model_id: str, prompt: str) -> str:
    return hashlib.sha256(f"{backend_id}\x1f{model_id}\x1f{prompt}".encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    key: str
    backend_id: str
    model_id: str
    request: BackendRequest
    distribution: TokenDistribution
    created_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def __post_init__(self):
        if cache_key(self.backend_id, self.model_id, self.request.prompt) != self.key:
            raise ValueError(f"cache key mismatch for entry {self.key[:12]}...")

    def to_json(self) -> str:
        return json.dumps(
            {
                "key": self.key,
                "backend_id": self.backend_id,
                "model_id": self.model_id,
                "request": asdict(self.request),
                "distribution": self.distribution.to_dict(),
                "created_at": self.created_at,
            },
            ensure_ascii=False,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, line: str) -> "CacheEntry":
        d = json.loads(line)
        return cls(
            key=d["key"],
            backend_id=d["backend_id"],
            model_id=d["model_id"],
            request=BackendRequest(**d["request"]),
            distribution=TokenDistribution.from_dict(d["distribution"]),
            created_at=d["created_at"],
        )


class CachedBackend:
    """Content-addressed response cache in front of another backend.

    Entries are appended to ``path`` as they arrive, so an interrupted run
    keeps everything it already paid for.  A truncated final line (crash
    mid-write) is skipped on load.
    """

    def __init__(self, inner: Backend, path: str | os.PathLike | None = None):
        self.inner = inner
        self.path = Path(path) if path is not None else None
        self.hits = 0
        self._entries: dict[str, CacheEntry] = {}
        self._lock = threading.Lock()
        if self.path is not None and self.path.exists():
            self._load()

    @property
    def backend_id(self) -> str:
        return self.inner.backend_id

    @property
    def model_id(self) -> str:
        return self.inner.model_id

    def _load(self) -> None:
        # not splitlines(): it also breaks on U+2028 and friends, which JSON leaves unescaped
        lines = self.path.read_text(encoding="utf-8").split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        for n, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            try:
                entry = CacheEntry.from_json(line)
            except (ValueError, KeyError, TypeError) as exc:
                if n == len(lines):
                    log.warning("ignoring truncated last cache line in %s", self.path)
                    continue
                raise ValueError(f"{self.path}:{n}: corrupt cache entry ({exc})") from exc
            self._entries[entry.key] = entry

    def __len__(self) -> int:
        return len(self._entries)

    def query(self, request: BackendRequest) -> TokenDistribution:
        key = cache_key(self.inner.backend_id, self.inner.model_id, request.prompt)
        with self._lock:
            hit = self._entries.get(key)
            if hit is not None:
                self.hits += 1
                return hit.distribution
        dist = self.inner.query(request)
        entry = CacheEntry(key, self.inner.backend_id, self.inner.model_id, request, dist)
        with self._lock:
            if key not in self._entries:
                self._entries[key] = entry
                if self.path is not None:
                    self.path.parent.mkdir(parents=True, exist_ok=True)
                    with open(self.path, "a", encoding="utf-8") as fh:
                        fh.write(entry.to_json() + "\n")
            return self._entries[key].distribution


def make_backend(
    kind: str,
    model_id: str | None = None,
    cache_path: str | os.PathLike | None = None,
    api_url: str | None = None,
) -> CachedBackend:
    if kind == "heuristic":
        inner: Backend = HeuristicBackend(model_id or "heuristic-v1")
    elif kind == "remote":
        if not model_id:
            raise BackendError("remote backend needs a model id")
        inner = RemoteBackend(model_id, url=api_url)
    else:
        raise ValueError(f"unknown backend {kind!r}")
    return CachedBackend(inner, cache_path)
