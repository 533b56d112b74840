"""Tokenization, stopword handling and rule-based noun lemmatization."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol

_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)?|\S+")
_ALPHA_RE = re.compile(r"^[a-z]+$")

# Irregular plurals and words whose surface form is already the lemma.
LEMMA_EXCEPTIONS = {
    "people": "person",
    "men": "man",
    "women": "woman",
    "children": "child",
    "feet": "foot",
    "teeth": "tooth",
    "mice": "mouse",
    "data": "data",
    "news": "news",
    "series": "series",
    "species": "species",
    "analysis": "analysis",
    "analyses": "analysis",
    "crisis": "crisis",
    "crises": "crisis",
    "basis": "basis",
    "status": "status",
    "bus": "bus",
    "gas": "gas",
    "economics": "economics",
    "logistics": "logistics",
    "statistics": "statistics",
    "indices": "index",
    "criteria": "criterion",
    "phenomena": "phenomenon",
    "lives": "life",
    "knives": "knife",
    "wives": "wife",
    "halves": "half",
    "leaves": "leaf",
    "shelves": "shelf",
    "thieves": "thief",
    "tariffs": "tariff",
}

# Ordered (suffix, replacement); the first matching rule wins.
SUFFIX_RULES = (
    ("ies", "y"),
    ("sses", "ss"),
    ("shes", "sh"),
    ("ches", "ch"),
    ("xes", "x"),
    ("zes", "z"),
    ("oes", "o"),
    ("ss", "ss"),
    ("us", "us"),
    ("is", "is"),
    ("s", ""),
)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; possessive/contraction tails are dropped."""
    out = []
    for tok in _TOKEN_RE.findall(text):
        tok = tok.lower()
        if "'" in tok:
            tok = tok.split("'", 1)[0]
        out.append(tok)
    return out


def is_alpha(token: str) -> bool:
    return bool(_ALPHA_RE.match(token))


def lemmatize(token: str) -> str:
    token = token.lower()
    if token in LEMMA_EXCEPTIONS:
        return LEMMA_EXCEPTIONS[token]
    if len(token) <= 3:
        return token
    for suffix, repl in SUFFIX_RULES:
        if token.endswith(suffix):
            stem = token[: len(token) - len(suffix)] + repl
            return stem if len(stem) >= 2 else token
    return token


class NounTagger(Protocol):
    def is_noun(self, lemma: str) -> bool: ...


class LexiconTagger:
    """Accepts a lemma as a noun iff it appears in a fixed lexicon."""

    def __init__(self, nouns: Iterable[str]):
        self.nouns = frozenset(n.strip().lower() for n in nouns if n.strip())

    def is_noun(self, lemma: str) -> bool:
        return lemma in self.nouns


def read_token_list(path) -> list[str]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return [ln.strip().lower() for ln in lines if ln.strip() and not ln.startswith("#")]


def _bundled(name: str) -> list[str]:
    with resources.as_file(resources.files("semxai.data") / name) as p:
        return read_token_list(p)


def default_stopwords() -> frozenset[str]:
    return frozenset(_bundled("stopwords.txt"))


def default_noun_lexicon() -> list[str]:
    return _bundled("nouns.txt")
