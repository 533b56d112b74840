"""Media-event context: temporally aligned queries, event retrieval, keyword extraction."""

from __future__ import annotations

import datetime as dt
import json
import re
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Protocol, Sequence

from .forecasting.features import FeatureSpec, FeatureVector, expand_keywords
from .text import LexiconTagger, NounTagger, is_alpha, lemmatize, tokenize
from .timeutil import Month


class UnknownFeature(KeyError):
    pass


class BackendUnavailable(ConnectionError):
    pass


@dataclass(frozen=True)
class EventQuery:
    keywords: tuple[str, ...]
    start: dt.date
    end: dt.date
    feature_id: str
    reference_month: Optional[Month] = None

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("query window start is after its end")
        if not self.keywords:
            raise ValueError("query needs at least one keyword")


@dataclass(frozen=True)
class MediaEvent:
    id: str
    date: dt.date
    title: str
    body: str
    source: str = ""

    @classmethod
    def from_record(cls, rec: Mapping) -> "MediaEvent":
        return cls(str(rec["id"]), dt.date.fromisoformat(rec["date"]), rec["title"],
                   rec.get("body", ""), rec.get("source", ""))

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["date"] = self.date.isoformat()
        return rec

    @property
    def text(self) -> str:
        return f"{self.title}\n{self.body}"


@dataclass(frozen=True)
class KeywordStat:
    lemma: str
    frequency: int
    supporting_event_ids: tuple[str, ...]


def build_queries(ranked_features: Sequence, specs: Sequence[FeatureSpec] | Mapping[str, FeatureSpec],
                  target_month, closeness_days: int = 15,
                  vector: Optional[FeatureVector] = None) -> list[EventQuery]:
    """One query per (ranked feature, reference month), windowed around mid-month.

    ``ranked_features`` holds feature ids or ``(feature_id, contribution)`` pairs.
    Reference months come from ``vector`` when given, otherwise from the FeatureSpec lags.
    """
    by_id = specs if isinstance(specs, Mapping) else {s.id: s for s in specs}
    target = Month.of(target_month)
    pad = dt.timedelta(days=closeness_days)
    queries = []
    for item in ranked_features:
        fid = item[0] if isinstance(item, tuple) else item
        if fid not in by_id:
            raise UnknownFeature(fid)
        keywords = tuple(expand_keywords(fid, by_id))
        if vector is not None:
            refs = vector.reference_months(fid)
        else:
            refs = tuple(target - lag for lag in by_id[fid].definition.lags)
        for ref in refs:
            center = ref.midpoint()
            queries.append(EventQuery(keywords, center - pad, center + pad, fid, ref))
    return queries


def _phrase_pattern(phrase: str) -> re.Pattern:
    words = [re.escape(w) for w in phrase.lower().split()]
    return re.compile(r"(?<![a-z0-9])" + r"\s+".join(words) + r"(?![a-z0-9])")


class EventBackend(Protocol):
    def search(self, keywords: Sequence[str], start: dt.date, end: dt.date,
               limit: int) -> list[MediaEvent]: ...


class FixtureEventBackend:
    """Immutable in-memory event index with whole-phrase, case-insensitive matching."""

    def __init__(self, events: Iterable[MediaEvent], max_results: int = 20):
        self.events = tuple(sorted(events, key=lambda e: (e.date, e.id)))
        ids = [e.id for e in self.events]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate event ids in fixture")
        self._lowered = tuple(e.text.lower() for e in self.events)
        self.max_results = max_results

    @classmethod
    def from_jsonl(cls, path, max_results: int = 20) -> "FixtureEventBackend":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls((MediaEvent.from_record(json.loads(ln)) for ln in lines if ln.strip()), max_results)

    def search(self, keywords, start, end, limit=None) -> list[MediaEvent]:
        limit = self.max_results if limit is None else min(limit, self.max_results)
        patterns = [_phrase_pattern(k) for k in keywords]
        hits = []
        for event, text in zip(self.events, self._lowered):
            if start <= event.date <= end and any(p.search(text) for p in patterns):
                hits.append(event)
                if len(hits) >= limit:
                    break
        return hits


class HttpEventClient:
    """Adapter for a remote event service answering ``GET {base_url}/events``.

    Query parameters: ``keywords`` (repeated), ``start``, ``end``, ``limit``;
    the response is a JSON list of event records.
    """

    def __init__(self, base_url: str, timeout: float = 10.0, transport=None):
        import httpx

        self._client = httpx.Client(base_url=base_url, timeout=timeout, transport=transport)
        self._errors = (httpx.TransportError, httpx.HTTPStatusError)

    def search(self, keywords, start, end, limit=20) -> list[MediaEvent]:
        params = [("keywords", k) for k in keywords]
        params += [("start", start.isoformat()), ("end", end.isoformat()), ("limit", str(limit))]
        try:
            resp = self._client.get("/events", params=params)
            resp.raise_for_status()
        except self._errors as exc:
            raise BackendUnavailable(str(exc)) from exc
        events = [MediaEvent.from_record(r) for r in resp.json()]
        return sorted(events, key=lambda e: (e.date, e.id))[:limit]


def retrieve_events(query: EventQuery, backend: EventBackend, limit: int = 20) -> list[MediaEvent]:
    return backend.search(query.keywords, query.start, query.end, limit)


def extract_keywords(events: Iterable[MediaEvent], stopwords: Iterable[str],
                     tagger: NounTagger | Iterable[str]) -> list[KeywordStat]:
    """Lemmatized noun counts over event titles and bodies.

    Sorted by frequency descending, then lemma.
    """
    stop = frozenset(stopwords)
    if not hasattr(tagger, "is_noun"):
        tagger = LexiconTagger(tagger)
    counts: Counter[str] = Counter()
    support: dict[str, set[str]] = defaultdict(set)
    for event in events:
        for tok in tokenize(event.text):
            if tok in stop or not is_alpha(tok):
                continue
            lemma = lemmatize(tok)
            if lemma in stop or not tagger.is_noun(lemma):
                continue
            counts[lemma] += 1
            support[lemma].add(event.id)
    return [KeywordStat(lemma, n, tuple(sorted(support[lemma])))
            for lemma, n in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]
