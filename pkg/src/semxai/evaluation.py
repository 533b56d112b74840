"""Explanation-quality metrics over annotated explanation entries."""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

KINDS = ("event", "keyword", "dataset")


class MalformedAnnotationFile(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class NoAnnotations(ValueError):
    pass


class EmptyEntries(ValueError):
    pass


@dataclass(frozen=True)
class AnnotationRecord:
    explanation_id: str
    item_kind: str
    rank: int
    item_id: str
    relevant: bool


def precision_at_k(items: Sequence[bool], k: int) -> Optional[float]:
    """Share of relevant items among the first ``min(k, len(items))``; None for no items."""
    if k < 1:
        raise ValueError("k must be >= 1")
    head = list(items)[:k]
    if not head:
        return None
    return sum(bool(x) for x in head) / len(head)


def rde(entries: Sequence[str]) -> float:
    """Ratio of diverse entries: unique entries over listed entries."""
    if not entries:
        raise EmptyEntries("no entries listed")
    return len(set(entries)) / len(entries)


def group_by_explanation(annotations: Iterable[AnnotationRecord], kind: str) -> dict[str, list[AnnotationRecord]]:
    groups: dict[str, list[AnnotationRecord]] = defaultdict(list)
    for rec in annotations:
        if rec.item_kind == kind:
            groups[rec.explanation_id].append(rec)
    return {eid: sorted(recs, key=lambda r: r.rank) for eid, recs in sorted(groups.items())}


def average_precision_at_k(annotations: Iterable[AnnotationRecord], kind: str, k: int) -> float:
    values = [precision_at_k([r.relevant for r in recs], k)
              for recs in group_by_explanation(annotations, kind).values()]
    values = [v for v in values if v is not None]
    if not values:
        raise NoAnnotations(f"no {kind} annotations")
    return sum(values) / len(values)


def rde_at_k(annotations: Iterable[AnnotationRecord], kind: str, k: int) -> float:
    groups = group_by_explanation(annotations, kind)
    if not groups:
        raise NoAnnotations(f"no {kind} annotations")
    return rde([r.item_id for recs in groups.values() for r in recs[:k]])


def accuracy(annotations: Iterable[AnnotationRecord], kind: str = "dataset") -> float:
    flags = [r.relevant for r in annotations if r.item_kind == kind]
    if not flags:
        raise NoAnnotations(f"no {kind} annotations")
    return sum(flags) / len(flags)


@dataclass
class MetricsReport:
    events_avg_precision_at_1: float
    events_avg_precision_at_3: float
    events_rde_at_1: float
    events_rde_at_3: float
    keywords_avg_precision_at_1: float
    keywords_avg_precision_at_3: float
    keywords_rde_at_1: float
    keywords_rde_at_3: float
    datasets_accuracy: float
    datasets_rde: float
    n_explanations: int
    n_entries: int

    def rows(self) -> list[tuple[str, str, float]]:
        return [
            ("Media Events", "average precision@1", self.events_avg_precision_at_1),
            ("Media Events", "average precision@3", self.events_avg_precision_at_3),
            ("Media Events", "RDE@1", self.events_rde_at_1),
            ("Media Events", "RDE@3", self.events_rde_at_3),
            ("Media Events' Keywords", "average precision@1", self.keywords_avg_precision_at_1),
            ("Media Events' Keywords", "average precision@3", self.keywords_avg_precision_at_3),
            ("Media Events' Keywords", "RDE@1", self.keywords_rde_at_1),
            ("Media Events' Keywords", "RDE@3", self.keywords_rde_at_3),
            ("External Datasets", "accuracy", self.datasets_accuracy),
            ("External Datasets", "RDE", self.datasets_rde),
        ]

    def to_document(self) -> dict:
        doc = asdict(self)
        doc["table"] = [{"group": g, "metric": m, "value": v} for g, m, v in self.rows()]
        return doc

    def render_text(self, digits: int = 2) -> str:
        width = max(len(g) for g, _, _ in self.rows())
        lines = [f"{'':{width}}  {'Metric':<20}  Value"]
        last = None
        for group, metric, value in self.rows():
            lines.append(f"{group if group != last else '':{width}}  {metric:<20}  {value:.{digits}f}")
            last = group
        lines.append(f"({self.n_explanations} explanations, {self.n_entries} annotated entries)")
        return "\n".join(lines) + "\n"


def report(annotations: Sequence[AnnotationRecord]) -> MetricsReport:
    if not annotations:
        raise NoAnnotations("annotation set is empty")
    return MetricsReport(
        events_avg_precision_at_1=average_precision_at_k(annotations, "event", 1),
        events_avg_precision_at_3=average_precision_at_k(annotations, "event", 3),
        events_rde_at_1=rde_at_k(annotations, "event", 1),
        events_rde_at_3=rde_at_k(annotations, "event", 3),
        keywords_avg_precision_at_1=average_precision_at_k(annotations, "keyword", 1),
        keywords_avg_precision_at_3=average_precision_at_k(annotations, "keyword", 3),
        keywords_rde_at_1=rde_at_k(annotations, "keyword", 1),
        keywords_rde_at_3=rde_at_k(annotations, "keyword", 3),
        datasets_accuracy=accuracy(annotations, "dataset"),
        datasets_rde=rde([r.item_id for r in annotations if r.item_kind == "dataset"]),
        n_explanations=len({r.explanation_id for r in annotations}),
        n_entries=len(annotations),
    )


COLUMNS = ("explanation_id", "item_kind", "rank", "item_id", "relevant")


def parse_annotations(text: str) -> list[AnnotationRecord]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise MalformedAnnotationFile("empty annotation file", 1)
    missing = set(COLUMNS) - set(reader.fieldnames)
    if missing:
        raise MalformedAnnotationFile(f"missing columns {sorted(missing)}", 1)
    out = []
    seen = set()
    for row in reader:
        line = reader.line_num
        kind = (row["item_kind"] or "").strip()
        if kind not in KINDS:
            raise MalformedAnnotationFile(f"unknown item_kind {kind!r}", line)
        try:
            rank = int(row["rank"])
        except (TypeError, ValueError):
            raise MalformedAnnotationFile(f"rank {row['rank']!r} is not an integer", line) from None
        limit = 1 if kind == "dataset" else 3
        if not 1 <= rank <= limit:
            raise MalformedAnnotationFile(f"rank {rank} out of range for {kind}", line)
        flag = (row["relevant"] or "").strip()
        if flag not in ("0", "1"):
            raise MalformedAnnotationFile(f"relevant must be 0 or 1, got {flag!r}", line)
        key = (row["explanation_id"], kind, rank)
        if key in seen:
            raise MalformedAnnotationFile(f"duplicate entry {key}", line)
        seen.add(key)
        item_id = (row["item_id"] or "").strip()
        if not item_id or not row["explanation_id"]:
            raise MalformedAnnotationFile("empty explanation_id or item_id", line)
        out.append(AnnotationRecord(row["explanation_id"], kind, rank, item_id, flag == "1"))
    if not out:
        raise MalformedAnnotationFile("annotation file has no records", reader.line_num or 1)
    return out


def load_annotations(path) -> list[AnnotationRecord]:
    return parse_annotations(Path(path).read_text(encoding="utf-8"))


def write_report(rep: MetricsReport, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(rep.to_document(), indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(rep.render_text())
