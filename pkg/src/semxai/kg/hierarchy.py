"""Loading the attribute-abstraction hierarchy into a graph."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Mapping, Optional

import yaml

from .graph import KnowledgeGraph
from .ontology import ConceptLabel, Relation


def load_hierarchy(path=None) -> tuple[dict[str, list[str]], dict[str, str]]:
    if path is None:
        text = (resources.files("semxai.data") / "hierarchy.yaml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    doc = yaml.safe_load(text)
    return {k: list(v) for k, v in doc["hierarchy"].items()}, dict(doc.get("descriptions") or {})


def install_hierarchy(kg: KnowledgeGraph, hierarchy: Mapping[str, list[str]],
                      feature_map: Mapping[str, str],
                      descriptions: Optional[Mapping[str, str]] = None,
                      actionable: Optional[Mapping[str, bool]] = None) -> None:
    """Create abstraction nodes, child->parent ``parentConcept`` edges and
    feature ``abstractedBy`` edges."""
    descriptions = descriptions or {}
    actionable = actionable or {}

    def concept(name):
        props = {"name": name}
        if name in descriptions:
            props["description"] = descriptions[name]
        return kg.upsert_node(ConceptLabel.ATTRIBUTE_ABSTRACTION, props)[0]

    with kg.lock:
        for parent, children in hierarchy.items():
            p = concept(parent)
            for child in children:
                kg.add_edge(concept(child).id, Relation.PARENT_CONCEPT, p.id)
        for feature_id, leaf in feature_map.items():
            props = {"feature_id": feature_id}
            if feature_id in actionable:
                props["actionable"] = bool(actionable[feature_id])
            attr, _ = kg.upsert_node(ConceptLabel.ATTRIBUTE, props)
            kg.add_edge(attr.id, Relation.ABSTRACTED_BY, concept(leaf).id)
