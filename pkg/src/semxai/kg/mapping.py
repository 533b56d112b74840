"""Declarative virtual mapping from flat source records to graph nodes and edges.

A rules document (YAML) declares the source record fields and one rule per
entry::

    sources:
      demand: [material_id, month, quantity]
    rules:
      - name: demand-vector
        source: demand
        selector: {}                      # field -> required value(s); empty matches all
        node:
          label: FeatureVector
          properties: {material: $material_id, month: $month, quantity: $quantity:float}
          event_time: $month              # YYYY-MM or YYYY-MM-DD
        edges:
          - relation: hasAttribute
            direction: in                 # "out": node -> target, "in": target -> node
            create: true                  # upsert the target instead of requiring it
            target: {label: Product, key: {material: $material_id}}

Values starting with ``$`` bind a record field (optionally ``:int``/``:float``
coerced); anything else is a literal.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional

import yaml

from ..timeutil import Month
from .graph import DanglingEdge, KnowledgeGraph, SchemaViolation
from .ontology import LABEL_SCHEMAS, RELATION_SCHEMA, ConceptLabel, Relation, label_of, relation_of

logger = logging.getLogger(__name__)

_COERCE = {"int": int, "float": float, "str": str}


@dataclass(frozen=True)
class Binding:
    field: Optional[str]
    literal: Any = None
    coerce: str = "str"

    @classmethod
    def parse(cls, spec) -> "Binding":
        if isinstance(spec, str) and spec.startswith("$"):
            name, _, kind = spec[1:].partition(":")
            kind = kind or "str"
            if kind not in _COERCE:
                raise SchemaViolation(f"unknown coercion {kind!r} in {spec!r}")
            return cls(name, None, kind)
        return cls(None, spec)

    def resolve(self, record: Mapping[str, Any]):
        if self.field is None:
            return self.literal
        value = record.get(self.field)
        if value is None or value == "":
            return None
        return _COERCE[self.coerce](value)


@dataclass(frozen=True)
class NodeTemplate:
    label: ConceptLabel
    properties: dict[str, Binding]
    event_time: Optional[Binding] = None


@dataclass(frozen=True)
class EdgeTemplate:
    relation: Relation
    target: NodeTemplate
    direction: str = "out"
    create: bool = False


@dataclass(frozen=True)
class MappingRule:
    name: str
    source: str
    node: NodeTemplate
    selector: dict[str, tuple] = field(default_factory=dict)
    edges: tuple[EdgeTemplate, ...] = ()

    def matches(self, record: Mapping[str, Any]) -> bool:
        return all(str(record.get(k)) in values for k, values in self.selector.items())

    def fields(self) -> set[str]:
        used = set(self.selector)
        templates = [self.node] + [e.target for e in self.edges]
        for t in templates:
            bindings = list(t.properties.values()) + ([t.event_time] if t.event_time else [])
            used.update(b.field for b in bindings if b.field is not None)
        return used


@dataclass
class IngestionSummary:
    nodes_created: int = 0
    edges_created: int = 0
    records_skipped: int = 0

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.nodes_created, self.edges_created, self.records_skipped)


def _node_template(spec: Mapping) -> NodeTemplate:
    label = label_of(spec["label"])
    props = spec.get("properties") or spec.get("key") or {}
    undeclared = set(props) - LABEL_SCHEMAS[label].properties
    if undeclared:
        raise SchemaViolation(f"{label.value} template binds undeclared properties {sorted(undeclared)}")
    missing = set(LABEL_SCHEMAS[label].key) - set(props)
    if missing:
        raise SchemaViolation(f"{label.value} template lacks key properties {sorted(missing)}")
    when = spec.get("event_time")
    return NodeTemplate(label, {k: Binding.parse(v) for k, v in props.items()},
                        Binding.parse(when) if when else None)


def parse_rule(spec: Mapping) -> MappingRule:
    node = _node_template(spec["node"])
    edges = []
    for e in spec.get("edges") or ():
        direction = e.get("direction", "out")
        if direction not in ("out", "in"):
            raise SchemaViolation(f"edge direction must be 'out' or 'in', got {direction!r}")
        edge = EdgeTemplate(relation_of(e["relation"]), _node_template(e["target"]),
                            direction, bool(e.get("create", False)))
        pair = (node.label, edge.target.label) if direction == "out" else (edge.target.label, node.label)
        if pair not in RELATION_SCHEMA[edge.relation]:
            raise SchemaViolation(
                f"rule {spec.get('name')!r}: {edge.relation.value} not allowed "
                f"from {pair[0].value} to {pair[1].value}"
            )
        edges.append(edge)
    selector = {
        k: tuple(str(x) for x in (v if isinstance(v, (list, tuple)) else [v]))
        for k, v in (spec.get("selector") or {}).items()
    }
    return MappingRule(spec.get("name", spec["source"]), spec["source"], node, selector, tuple(edges))


def validate_rules(rules: Iterable[MappingRule], sources: Mapping[str, Iterable[str]]):
    for rule in rules:
        if rule.source not in sources:
            raise SchemaViolation(f"rule {rule.name!r} reads undeclared source {rule.source!r}")
        unknown = rule.fields() - set(sources[rule.source])
        if unknown:
            raise SchemaViolation(f"rule {rule.name!r} binds undeclared fields {sorted(unknown)}")


def load_rules(path) -> list[MappingRule]:
    doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    rules = [parse_rule(r) for r in doc.get("rules") or ()]
    validate_rules(rules, doc.get("sources") or {})
    return rules


def _timestamp(value) -> Optional[dt.date]:
    if value is None:
        return None
    if isinstance(value, dt.date):
        return value
    text = str(value)
    return Month.parse(text).start() if len(text) == 7 else dt.date.fromisoformat(text)


def _bind(template: NodeTemplate, record) -> tuple[dict, Optional[dt.date]]:
    props = {}
    for name, binding in template.properties.items():
        value = binding.resolve(record)
        if value is not None:
            props[name] = value
    when = _timestamp(template.event_time.resolve(record)) if template.event_time else None
    return props, when


def apply_mapping(kg: KnowledgeGraph, records: Mapping[str, Iterable[Mapping]],
                  rules: Iterable[MappingRule]) -> IngestionSummary:
    """Instantiate ``rules`` over ``records`` (source name -> record sequence).

    Rules run in order, each over all records of its source, so later rules
    may reference nodes created by earlier ones. A rule application whose
    edge endpoint cannot be resolved is skipped and counted.
    """
    summary = IngestionSummary()
    skipped: set[tuple[str, int]] = set()
    with kg.lock:
        for rule in rules:
            for i, record in enumerate(records.get(rule.source, ())):
                if not rule.matches(record):
                    continue
                props, when = _bind(rule.node, record)
                resolved = []
                try:
                    for edge in rule.edges:
                        tprops, twhen = _bind(edge.target, record)
                        target = kg.find(edge.target.label, **tprops) if _has_key(edge.target, tprops) else None
                        if target is None and not edge.create:
                            raise DanglingEdge(f"{edge.target.label.value} {tprops}")
                        resolved.append((edge, target, tprops, twhen))
                except DanglingEdge as exc:
                    logger.debug("rule %s record %d skipped: %s", rule.name, i, exc)
                    skipped.add((rule.source, i))
                    continue
                node, created = kg.upsert_node(rule.node.label, props, when)
                summary.nodes_created += created
                for edge, target, tprops, twhen in resolved:
                    if target is None:
                        target, t_created = kg.upsert_node(edge.target.label, tprops, twhen)
                        summary.nodes_created += t_created
                    src, dst = (node.id, target.id) if edge.direction == "out" else (target.id, node.id)
                    summary.edges_created += kg.add_edge(src, edge.relation, dst)
    summary.records_skipped = len(skipped)
    return summary


def _has_key(template: NodeTemplate, props: dict) -> bool:
    return all(k in props for k in LABEL_SCHEMAS[template.label].key)
