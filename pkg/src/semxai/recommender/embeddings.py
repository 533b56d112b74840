"""Reader and writer for the word2vec binary embedding format.

Layout: an ASCII header ``"<vocab_size> <dimension>\\n"``, then per entry the
token bytes terminated by one space, ``dimension`` little-endian float32
values, and an optional newline.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np


class EmbeddingFormatError(ValueError):
    pass


class MalformedHeader(EmbeddingFormatError):
    pass


class TruncatedEntry(EmbeddingFormatError):
    def __init__(self, offset: int, detail: str = ""):
        super().__init__(f"truncated entry at byte offset {offset}" + (f": {detail}" if detail else ""))
        self.offset = offset


class DuplicateToken(EmbeddingFormatError):
    pass


@dataclass
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for tok, vec in self.vectors.items():
            if vec.shape != (self.dimension,):
                raise ValueError(f"vector for {tok!r} has shape {vec.shape}")

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __getitem__(self, token: str) -> np.ndarray:
        return self.vectors[token]

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix(self, tokens) -> np.ndarray:
        return np.stack([self.vectors[t] for t in tokens]).astype(np.float64)

    @classmethod
    def from_mapping(cls, vectors: Mapping[str, "np.typing.ArrayLike"]) -> "EmbeddingTable":
        vecs = {t: np.asarray(v, dtype="<f4") for t, v in vectors.items()}
        dim = len(next(iter(vecs.values()))) if vecs else 1
        return cls(dim, vecs)


def parse_embeddings(data: bytes) -> EmbeddingTable:
    nl = data.find(b"\n")
    if nl < 0:
        raise MalformedHeader("missing header line")
    parts = data[:nl].split()
    try:
        if len(parts) != 2:
            raise ValueError
        vocab_size, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise MalformedHeader(f"expected '<vocab_size> <dimension>', got {data[:nl][:60]!r}") from None
    if vocab_size < 0 or dim < 1:
        raise MalformedHeader(f"invalid header values {vocab_size} {dim}")

    width = 4 * dim
    pos = nl + 1
    vectors: dict[str, np.ndarray] = {}
    for _ in range(vocab_size):
        start = pos
        space = data.find(b" ", pos)
        if space < 0:
            raise TruncatedEntry(start, "no token terminator")
        raw = data[pos:space]
        if not raw:
            raise EmbeddingFormatError(f"empty token at byte offset {start}")
        try:
            token = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EmbeddingFormatError(f"token at byte offset {start} is not UTF-8") from exc
        pos = space + 1
        if pos + width > len(data):
            raise TruncatedEntry(start, f"vector for {token!r} needs {width} bytes")
        if token in vectors:
            raise DuplicateToken(f"{token!r} repeated at byte offset {start}")
        vectors[token] = np.frombuffer(data, dtype="<f4", count=dim, offset=pos).copy()
        pos += width
        if pos < len(data) and data[pos:pos + 1] == b"\n":
            pos += 1
    return EmbeddingTable(dim, vectors)


def load_embeddings(path) -> EmbeddingTable:
    return parse_embeddings(Path(path).read_bytes())


def dump_embeddings(table: EmbeddingTable) -> bytes:
    chunks = [f"{len(table)} {table.dimension}\n".encode("ascii")]
    for token, vec in table.vectors.items():
        if not token or any(c.isspace() for c in token):
            raise EmbeddingFormatError(f"token {token!r} cannot be serialized")
        chunks.append(token.encode("utf-8") + b" " + np.asarray(vec, dtype="<f4").tobytes() + b"\n")
    return b"".join(chunks)


def save_embeddings(table: EmbeddingTable, path) -> None:
    Path(path).write_bytes(dump_embeddings(table))
