"""Word Mover's Distance ranking of external dataset metadata."""

from __future__ import annotations

import bisect
import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from ..text import default_stopwords, is_alpha, tokenize
from .embeddings import EmbeddingTable
from .transport import solve_transport


class EmptyBag(ValueError):
    pass


class NoRankableCandidates(ValueError):
    pass


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class DocumentBag:
    tokens: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if not self.tokens:
            raise EmptyBag("bag has no tokens")
        if len(set(self.tokens)) != len(self.tokens) or len(self.tokens) != len(self.weights):
            raise ValueError("bag tokens must be unique with one weight each")
        if any(w <= 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("bag weights must be positive and sum to 1")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.tokens, self.weights))


@dataclass(frozen=True)
class DatasetMetadata:
    id: str
    title: str
    description: str = ""
    publisher: str = ""
    uri: str = ""

    def __post_init__(self):
        if not self.title:
            raise ValueError(f"dataset {self.id} has an empty title")

    @property
    def text(self) -> str:
        return f"{self.title} {self.description}"

    def to_record(self) -> dict:
        return {"id": self.id, "title": self.title, "description": self.description,
                "publisher": self.publisher, "uri": self.uri}


@dataclass(frozen=True)
class RankedDataset:
    metadata: DatasetMetadata
    distance: float


def bag_from_counts(counts: Mapping[str, float], table: EmbeddingTable) -> DocumentBag:
    kept = {t: float(c) for t, c in counts.items() if c > 0 and t in table}
    if not kept:
        raise EmptyBag("no in-vocabulary tokens")
    total = sum(kept.values())
    tokens = tuple(sorted(kept))
    return DocumentBag(tokens, tuple(kept[t] / total for t in tokens))


def to_nbow(text: str, table: EmbeddingTable, stopwords: Optional[Iterable[str]] = None) -> DocumentBag:
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    return bag_from_counts(Counter(t for t in tokenize(text) if t not in stop), table)


def _costs(a: DocumentBag, b: DocumentBag, table: EmbeddingTable) -> np.ndarray:
    A = table.matrix(a.tokens)
    B = table.matrix(b.tokens)
    diff = A[:, None, :] - B[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def wmd_plan(a: DocumentBag, b: DocumentBag, table: EmbeddingTable) -> tuple[float, np.ndarray]:
    return solve_transport(np.array(a.weights), np.array(b.weights), _costs(a, b, table))


def wmd(a: DocumentBag, b: DocumentBag, table: EmbeddingTable) -> float:
    if a == b:
        return 0.0
    return wmd_plan(a, b, table)[0]


def rwmd_lower_bound(a: DocumentBag, b: DocumentBag, table: EmbeddingTable) -> float:
    """Larger of the two one-sided relaxations (each word moves to its nearest counterpart)."""
    if a == b:
        return 0.0
    cost = _costs(a, b, table)
    forward = float(np.array(a.weights) @ cost.min(axis=1))
    backward = float(np.array(b.weights) @ cost.min(axis=0))
    return max(forward, backward)


def rank_datasets(query_bag: DocumentBag, candidates: Sequence[DatasetMetadata], table: EmbeddingTable,
                  top_n: int = 10, stopwords: Optional[Iterable[str]] = None,
                  prune: bool = True) -> list[RankedDataset]:
    """Closest ``top_n`` candidates by WMD (ties by id).

    With ``prune`` the exact solve is skipped for candidates whose relaxed
    lower bound already exceeds the current ``top_n``-th distance.
    """
    if top_n < 1:
        raise ValueError("top_n must be positive")
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    bags = []
    for meta in candidates:
        try:
            bags.append((meta, to_nbow(meta.text, table, stop)))
        except EmptyBag:
            continue
    if not bags:
        raise NoRankableCandidates("no candidate has in-vocabulary text")

    if prune:
        bounds = sorted(((rwmd_lower_bound(query_bag, bag, table), meta.id, meta, bag)
                         for meta, bag in bags), key=lambda t: (t[0], t[1]))
        scored: list[tuple[float, str, DatasetMetadata]] = []
        for bound, _, meta, bag in bounds:
            # margin absorbs rounding between the bound and the exact solve
            if len(scored) == top_n and bound > scored[-1][0] + 1e-12:
                break  # bounds ascend, so no later candidate can enter
            bisect.insort(scored, (wmd(query_bag, bag, table), meta.id, meta), key=lambda t: (t[0], t[1]))
            del scored[top_n:]
    else:
        scored = [(wmd(query_bag, bag, table), meta.id, meta) for meta, bag in bags]
    scored.sort(key=lambda t: (t[0], t[1]))
    return [RankedDataset(meta, dist) for dist, _, meta in scored[:top_n]]


def diversity_sample(ranked: Sequence, pool_size: int, k: int, seed: int) -> list:
    """Uniform draw of ``k`` items from the top ``pool_size``, keeping rank order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ranked:
        raise EmptyInput("nothing to sample from")
    pool = list(ranked[:max(pool_size, 1)])
    if len(pool) <= k:
        return pool
    picked = sorted(random.Random(seed).sample(range(len(pool)), k))
    return [pool[i] for i in picked]


def load_dataset_metadata(path) -> list[DatasetMetadata]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            rec = json.loads(line)
            out.append(DatasetMetadata(str(rec["id"]), rec["title"], rec.get("description", ""),
                                       rec.get("publisher", ""), rec.get("uri", "")))
    ids = [d.id for d in out]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate dataset ids")
    return out


class FixtureDatasetBackend:
    """Keyword search over bundled metadata: entries sharing any query word."""

    def __init__(self, entries: Iterable[DatasetMetadata]):
        self.entries = tuple(sorted(entries, key=lambda d: d.id))
        self._words = tuple(frozenset(tokenize(d.text)) for d in self.entries)

    def search(self, keywords: Sequence[str], limit: int = 100) -> list[DatasetMetadata]:
        stop = default_stopwords()
        wanted = {w for k in keywords for w in tokenize(k) if is_alpha(w) and w not in stop}
        hits = [d for d, words in zip(self.entries, self._words) if words & wanted]
        return hits[:limit]
