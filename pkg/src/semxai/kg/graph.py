"""In-process typed property graph store."""

from __future__ import annotations

import copy
import datetime as dt
import json
import re
import threading
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

from .ontology import (
    LABEL_SCHEMAS,
    RELATION_SCHEMA,
    ConceptLabel,
    Relation,
    label_of,
    node_id_for,
    relation_of,
)


class SchemaViolation(ValueError):
    pass


class DanglingEdge(KeyError):
    pass


class UnknownAttribute(KeyError):
    pass


class CycleDetected(ValueError):
    pass


class ReadOnlyGraph(RuntimeError):
    pass


@dataclass
class KGNode:
    id: str
    label: ConceptLabel
    properties: dict[str, Any] = field(default_factory=dict)
    event_time: Optional[dt.date] = None

    def to_record(self) -> dict:
        return {
            "kind": "node",
            "id": self.id,
            "label": self.label.value,
            "properties": self.properties,
            "event_time": self.event_time.isoformat() if self.event_time else None,
        }


@dataclass(frozen=True, order=True)
class KGEdge:
    src: str
    relation: Relation
    dst: str

    def to_record(self) -> dict:
        return {"kind": "edge", "src": self.src, "relation": self.relation.value, "dst": self.dst}


_STEP_RE = re.compile(r"\s*(<-|-)\[\s*(\w+)\s*\](->|-)\s*")
_NODE_RE = re.compile(r"\s*\(\s*(?:(\w+)\s*:)?\s*(\w+)\s*\)\s*")


@dataclass(frozen=True)
class PatternStep:
    var: str
    label: ConceptLabel
    relation: Optional[Relation] = None  # edge leading into this node
    reverse: bool = False


def parse_pattern(pattern: str) -> list[PatternStep]:
    """Parse ``(a:Label)-[rel]->(b:Label)<-[rel]-(c:Label)`` into steps.

    Variables are optional; unnamed nodes get ``n0``, ``n1``, ...
    """
    steps: list[PatternStep] = []
    pos = 0
    relation, reverse = None, False
    while True:
        m = _NODE_RE.match(pattern, pos)
        if not m:
            raise ValueError(f"bad pattern near offset {pos}: {pattern!r}")
        var = m.group(1) or f"n{len(steps)}"
        steps.append(PatternStep(var, label_of(m.group(2)), relation, reverse))
        pos = m.end()
        if pos == len(pattern):
            break
        e = _STEP_RE.match(pattern, pos)
        if not e:
            raise ValueError(f"bad pattern near offset {pos}: {pattern!r}")
        left, rel, right = e.groups()
        if (left == "<-") == (right == "->"):
            raise ValueError(f"edge must have exactly one direction: {e.group(0)!r}")
        relation, reverse = relation_of(rel), left == "<-"
        pos = e.end()
    return steps


class KnowledgeGraph:
    """Typed property graph.

    Single writer, many readers: mutations hold ``lock``; readers that need a
    stable view take ``snapshot()``.
    """

    def __init__(self):
        self.nodes: dict[str, KGNode] = {}
        self.edges: set[KGEdge] = set()
        self._out: dict[str, set[KGEdge]] = defaultdict(set)
        self._in: dict[str, set[KGEdge]] = defaultdict(set)
        self.lock = threading.RLock()
        self.read_only = False

    def __len__(self) -> int:
        return len(self.nodes)

    def _check_writable(self):
        if self.read_only:
            raise ReadOnlyGraph("graph snapshot is read-only")

    # -- mutation ----------------------------------------------------------

    def upsert_node(self, label, properties: dict, event_time: Optional[dt.date] = None):
        """Insert or merge a node identified by its label's natural key.

        Returns ``(node, created)``.
        """
        label = label_of(label)
        schema = LABEL_SCHEMAS[label]
        undeclared = set(properties) - schema.properties
        if undeclared:
            raise SchemaViolation(f"{label.value} has no properties {sorted(undeclared)}")
        missing = [k for k in schema.key if properties.get(k) in (None, "")]
        if missing:
            raise SchemaViolation(f"{label.value} requires key properties {missing}")
        node_id = node_id_for(label, properties)
        with self.lock:
            self._check_writable()
            node = self.nodes.get(node_id)
            if node is not None:
                node.properties.update(properties)
                if event_time is not None:
                    node.event_time = event_time
                return node, False
            node = KGNode(node_id, label, dict(properties), event_time)
            self.nodes[node_id] = node
            return node, True

    def add_edge(self, src: str, relation, dst: str) -> bool:
        relation = relation_of(relation)
        with self.lock:
            self._check_writable()
            if src not in self.nodes or dst not in self.nodes:
                missing = src if src not in self.nodes else dst
                raise DanglingEdge(f"edge endpoint {missing!r} does not exist")
            pair = (self.nodes[src].label, self.nodes[dst].label)
            if pair not in RELATION_SCHEMA[relation]:
                raise SchemaViolation(
                    f"{relation.value} not allowed from {pair[0].value} to {pair[1].value}"
                )
            edge = KGEdge(src, relation, dst)
            if edge in self.edges:
                return False
            self.edges.add(edge)
            self._out[src].add(edge)
            self._in[dst].add(edge)
            return True

    def remove_node(self, node_id: str):
        with self.lock:
            self._check_writable()
            for edge in list(self._out.pop(node_id, ())) + list(self._in.pop(node_id, ())):
                self.edges.discard(edge)
                self._out[edge.src].discard(edge)
                self._in[edge.dst].discard(edge)
            del self.nodes[node_id]

    def prune_window(self, now: dt.date, window: dt.timedelta) -> int:
        """Drop instance nodes older than ``now - window``; schema nodes stay."""
        if window <= dt.timedelta(0):
            raise ValueError("window must be positive")
        cutoff = now - window
        with self.lock:
            stale = [n.id for n in self.nodes.values()
                     if n.event_time is not None and n.event_time < cutoff]
            for node_id in stale:
                self.remove_node(node_id)
        return len(stale)

    # -- lookup ------------------------------------------------------------

    def find(self, label, **key) -> Optional[KGNode]:
        label = label_of(label)
        try:
            return self.nodes.get(node_id_for(label, key))
        except KeyError:
            return None

    def by_label(self, label) -> list[KGNode]:
        label = label_of(label)
        return sorted((n for n in self.nodes.values() if n.label is label), key=lambda n: n.id)

    def out_edges(self, node_id: str, relation=None) -> list[KGEdge]:
        rel = relation_of(relation) if relation is not None else None
        return sorted(e for e in self._out.get(node_id, ()) if rel is None or e.relation is rel)

    def in_edges(self, node_id: str, relation=None) -> list[KGEdge]:
        rel = relation_of(relation) if relation is not None else None
        return sorted(e for e in self._in.get(node_id, ()) if rel is None or e.relation is rel)

    def query(self, pattern: str, where: Optional[dict[str, dict]] = None) -> list[dict[str, KGNode]]:
        """Match a linear path pattern; rows sorted by their node id tuples."""
        steps = parse_pattern(pattern)
        where = where or {}
        unknown = set(where) - {s.var for s in steps}
        if unknown:
            raise ValueError(f"filters reference unknown variables {sorted(unknown)}")

        def accepts(step: PatternStep, node: KGNode) -> bool:
            if node.label is not step.label:
                return False
            for prop, value in where.get(step.var, {}).items():
                if str(node.properties.get(prop)) != str(value):
                    return False
            return True

        rows: list[list[str]] = [[n.id] for n in self.by_label(steps[0].label) if accepts(steps[0], n)]
        for step in steps[1:]:
            extended = []
            for row in rows:
                last = row[-1]
                if step.reverse:
                    candidates = [e.src for e in self.in_edges(last, step.relation)]
                else:
                    candidates = [e.dst for e in self.out_edges(last, step.relation)]
                for nid in candidates:
                    if accepts(step, self.nodes[nid]):
                        extended.append(row + [nid])
            rows = extended
        rows.sort()
        return [{s.var: self.nodes[nid] for s, nid in zip(steps, row)} for row in rows]

    def abstraction_chain(self, attribute_id: str, levels: int) -> list[str]:
        """Abstraction names above a feature, nearest first, at most ``levels`` long."""
        if levels < 1:
            raise ValueError("levels must be positive")
        attr = self.find(ConceptLabel.ATTRIBUTE, feature_id=attribute_id)
        if attr is None:
            raise UnknownAttribute(attribute_id)
        direct = self.out_edges(attr.id, Relation.ABSTRACTED_BY)
        if not direct:
            raise UnknownAttribute(f"{attribute_id} has no abstraction")
        chain: list[str] = []
        seen: set[str] = set()
        current: Optional[str] = direct[0].dst
        # Walk to the root even when fewer levels are requested, so a cyclic
        # hierarchy is always refused.
        while current is not None:
            if current in seen:
                raise CycleDetected(f"abstraction hierarchy cycles through {current}")
            seen.add(current)
            chain.append(self.nodes[current].properties["name"])
            parents = self.out_edges(current, Relation.PARENT_CONCEPT)
            current = parents[0].dst if parents else None
        return chain[:levels]

    # -- invariants, snapshots, serialization --------------------------------

    def validate(self):
        for node in self.nodes.values():
            schema = LABEL_SCHEMAS[node.label]
            if any(k not in node.properties for k in schema.key):
                raise SchemaViolation(f"node {node.id} lacks key properties")
        for edge in self.edges:
            if edge.src not in self.nodes or edge.dst not in self.nodes:
                raise DanglingEdge(str(edge))
            pair = (self.nodes[edge.src].label, self.nodes[edge.dst].label)
            if pair not in RELATION_SCHEMA[edge.relation]:
                raise SchemaViolation(str(edge))

    def snapshot(self) -> "KnowledgeGraph":
        with self.lock:
            other = KnowledgeGraph()
            other.nodes = copy.deepcopy(self.nodes)
            for edge in self.edges:
                other.edges.add(edge)
                other._out[edge.src].add(edge)
                other._in[edge.dst].add(edge)
        other.read_only = True
        return other

    def iter_records(self) -> Iterator[dict]:
        for node_id in sorted(self.nodes):
            yield self.nodes[node_id].to_record()
        for edge in sorted(self.edges):
            yield edge.to_record()

    def export_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.iter_records():
                fh.write(json.dumps(rec, sort_keys=True) + "\n")

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "KnowledgeGraph":
        kg = cls()
        edges = []
        for rec in records:
            if rec["kind"] == "node":
                when = rec.get("event_time")
                node = KGNode(
                    rec["id"],
                    label_of(rec["label"]),
                    dict(rec["properties"]),
                    dt.date.fromisoformat(when) if when else None,
                )
                kg.nodes[node.id] = node
            elif rec["kind"] == "edge":
                edges.append(rec)
            else:
                raise ValueError(f"unknown record kind {rec['kind']!r}")
        for rec in edges:
            kg.add_edge(rec["src"], rec["relation"], rec["dst"])
        return kg

    @classmethod
    def import_jsonl(cls, path) -> "KnowledgeGraph":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls.from_records(json.loads(ln) for ln in lines if ln.strip())
