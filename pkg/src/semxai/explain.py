"""Assembly of multi-part forecast explanations and their per-profile views."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .forecasting.features import FeatureSpec
from .forecasting.uncertainty import Prediction
from .kg import ConceptLabel, KnowledgeGraph, Relation, UnknownAttribute
from .media import MediaEvent
from .recommender.ranking import DatasetMetadata
from .timeutil import Month

SECTIONS = ("prediction", "concepts", "actionable", "events", "keywords", "dataset")


class UnmappedFeature(KeyError):
    pass


class DuplicateEvidence(ValueError):
    pass


class MissingSection(ValueError):
    pass


class UnknownProfile(KeyError):
    pass


@dataclass(frozen=True)
class UserProfile:
    name: str
    visible_sections: frozenset[str]
    show_features: bool = False


PROFILES: dict[str, UserProfile] = {
    "planner": UserProfile("planner", frozenset({"prediction", "concepts", "actionable", "events"})),
    "expert": UserProfile("expert", frozenset(SECTIONS), show_features=True),
}


@dataclass(frozen=True)
class ConceptHighlight:
    concept: str
    contribution_sign: str  # "increases" | "decreases"
    underlying_feature_ids: tuple[str, ...]


@dataclass(frozen=True)
class ActionableNote:
    concept: str
    feature_id: str


@dataclass(frozen=True)
class EventEvidence:
    event: MediaEvent
    feature_ids: tuple[str, ...] = ()  # features whose queries retrieved the event


@dataclass
class ForecastExplanation:
    id: str
    prediction: Prediction
    concept_highlights: list[ConceptHighlight]
    actionable_note: Optional[ActionableNote]
    events: list[EventEvidence]
    keywords: list[str]
    dataset: DatasetMetadata
    concept_descriptions: dict[str, str] = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"id": self.id, **redact(self, "expert")}

    @classmethod
    def from_record(cls, rec: Mapping) -> "ForecastExplanation":
        """Inverse of ``to_record`` (event bodies and residual pools are not stored)."""
        p = rec["prediction"]
        prediction = Prediction(p["material"], Month.parse(p["month"]), p["value"], p["lower"], p["upper"])
        highlights = [ConceptHighlight(c["concept"], c["effect"], tuple(c.get("features", ())))
                      for c in rec["concepts"]]
        a = rec.get("actionable")
        note = None if a is None else ActionableNote(a["concept"], a.get("feature", ""))
        events = [EventEvidence(MediaEvent.from_record(e), tuple(e.get("features", ()))) for e in rec["events"]]
        d = rec["dataset"]
        dataset = DatasetMetadata(d["id"], d["title"], d.get("description", ""), d.get("publisher", ""),
                                  d.get("uri", ""))
        descriptions = {c["concept"]: c["description"] for c in rec["concepts"] if c.get("description")}
        return cls(rec["id"], prediction, highlights, note, events, list(rec["keywords"]), dataset, descriptions)


def _sign(value: float) -> str:
    return "increases" if value >= 0 else "decreases"


def abstract_concepts(ranking: Sequence[tuple[str, float]], kg: KnowledgeGraph,
                      min_level: int = 1) -> list[ConceptHighlight]:
    """Replace ranked features by their abstraction ``min_level`` steps up.

    Features landing on the same concept merge into one highlight carrying
    the sign of the largest-magnitude contributor, positioned at the best rank.
    """
    if min_level < 1:
        raise ValueError("at least one abstraction level is required")
    merged: dict[str, list[tuple[str, float]]] = {}
    for fid, contribution in ranking:
        try:
            chain = kg.abstraction_chain(fid, min_level)
        except UnknownAttribute:
            raise UnmappedFeature(fid) from None
        merged.setdefault(chain[-1], []).append((fid, contribution))
    out = []
    for concept, members in merged.items():
        dominant = max(members, key=lambda m: abs(m[1]))  # first wins ties
        out.append(ConceptHighlight(concept, _sign(dominant[1]), tuple(fid for fid, _ in members)))
    return out


def actionable_highlight(ranking: Sequence[tuple[str, float]],
                         specs: Sequence[FeatureSpec] | Mapping[str, FeatureSpec],
                         kg: Optional[KnowledgeGraph] = None, min_level: int = 1) -> Optional[ActionableNote]:
    """Highest-ranked actionable feature, named by its abstraction concept."""
    by_id = specs if isinstance(specs, Mapping) else {s.id: s for s in specs}
    for fid, _ in ranking:
        spec = by_id.get(fid)
        if spec is not None and spec.actionable:
            concept = kg.abstraction_chain(fid, min_level)[-1] if kg is not None else spec.abstraction_leaf
            return ActionableNote(concept, fid)
    return None


def _check_unique(kind: str, ids: list[str], expected: int):
    if len(ids) != expected:
        raise MissingSection(f"expected {expected} {kind}, got {len(ids)}")
    if len(set(ids)) != len(ids):
        raise DuplicateEvidence(f"repeated {kind}: {ids}")


def assemble(prediction: Prediction, highlights: Sequence[ConceptHighlight],
             actionable_note: Optional[ActionableNote], events: Sequence[EventEvidence | MediaEvent],
             keywords: Sequence[str], dataset: Optional[DatasetMetadata], kg: KnowledgeGraph,
             explanation_id: Optional[str] = None, n_events: int = 3, n_keywords: int = 3) -> ForecastExplanation:
    """Validate the evidence, build the explanation and persist it to ``kg``."""
    events = [e if isinstance(e, EventEvidence) else EventEvidence(e) for e in events]
    if not highlights:
        raise MissingSection("no concept highlights")
    if dataset is None:
        raise MissingSection("no dataset recommendation")
    _check_unique("events", [e.event.id for e in events], n_events)
    _check_unique("keywords", list(keywords), n_keywords)

    month = prediction.target_month
    explanation_id = explanation_id or f"{prediction.material}-{month}"
    descriptions = {}
    with kg.lock:
        for h in highlights:
            node = kg.find(ConceptLabel.ATTRIBUTE_ABSTRACTION, name=h.concept)
            if node is not None and "description" in node.properties:
                descriptions[h.concept] = node.properties["description"]
        pred_node, _ = kg.upsert_node(ConceptLabel.PREDICTION, {
            "material": prediction.material, "month": str(month),
            "value": prediction.value, "lower": prediction.lower, "upper": prediction.upper,
        }, month.start())
        props = {"explanation_id": explanation_id, "material": prediction.material,
                 "month": str(month), "concepts": [h.concept for h in highlights]}
        if actionable_note is not None:
            props["actionable"] = actionable_note.concept
        exp_node, _ = kg.upsert_node(ConceptLabel.FORECAST_EXPLANATION, props, month.start())
        kg.add_edge(exp_node.id, Relation.EXPLAINS, pred_node.id)
        for ev in events:
            e = ev.event
            node, _ = kg.upsert_node(ConceptLabel.MEDIA_REPORTED_EVENT, {
                "event_id": e.id, "date": e.date.isoformat(), "title": e.title, "source": e.source,
            }, e.date)
            kg.add_edge(exp_node.id, Relation.EVIDENCED_BY, node.id)
        for lemma in keywords:
            node, _ = kg.upsert_node(ConceptLabel.MEDIA_REPORTED_EVENT_KEYWORD, {"lemma": lemma})
            kg.add_edge(exp_node.id, Relation.HAS_KEYWORD, node.id)
        props = {"dataset_id": dataset.id, "title": dataset.title, "publisher": dataset.publisher,
                 "uri": dataset.uri}
        node, _ = kg.upsert_node(ConceptLabel.EXTERNAL_DATASET_METADATA, props)
        kg.add_edge(exp_node.id, Relation.RECOMMENDS_DATASET, node.id)

    return ForecastExplanation(explanation_id, prediction, list(highlights), actionable_note,
                               list(events), list(keywords), dataset, descriptions)


def redact(explanation: ForecastExplanation, profile: str | UserProfile) -> dict:
    """Structured view of ``explanation`` restricted to ``profile``'s sections."""
    if isinstance(profile, str):
        if profile not in PROFILES:
            raise UnknownProfile(profile)
        profile = PROFILES[profile]
    features = profile.show_features
    view: dict = {}
    p = explanation.prediction
    sections = {
        "prediction": lambda: {"material": p.material, "month": str(p.target_month),
                               "value": p.value, "lower": p.lower, "upper": p.upper},
        "concepts": lambda: [
            {"concept": h.concept,
             "description": explanation.concept_descriptions.get(h.concept, ""),
             "effect": h.contribution_sign,
             **({"features": list(h.underlying_feature_ids)} if features else {})}
            for h in explanation.concept_highlights
        ],
        "actionable": lambda: None if explanation.actionable_note is None else {
            "concept": explanation.actionable_note.concept,
            **({"feature": explanation.actionable_note.feature_id} if features else {}),
        },
        "events": lambda: [
            {"id": ev.event.id, "date": ev.event.date.isoformat(), "title": ev.event.title,
             "source": ev.event.source,
             **({"features": list(ev.feature_ids)} if features else {})}
            for ev in explanation.events
        ],
        "keywords": lambda: list(explanation.keywords),
        "dataset": lambda: explanation.dataset.to_record(),
    }
    for name in SECTIONS:
        if name in profile.visible_sections:
            view[name] = sections[name]()
    return view


def exposed_feature_ids(view: dict, feature_ids: Iterable[str]) -> list[str]:
    """Feature ids appearing as standalone tokens anywhere in the serialized view."""
    text = json.dumps(view, sort_keys=True)
    return [fid for fid in feature_ids
            if re.search(r"(?<![A-Za-z0-9_])" + re.escape(fid) + r"(?![A-Za-z0-9_])", text)]


def render_text(view: dict) -> str:
    lines = []
    if "prediction" in view:
        p = view["prediction"]
        lines.append(f"Forecast for {p['material']} in {p['month']}: {p['value']:.1f} "
                     f"(range {p['lower']:.1f} to {p['upper']:.1f})")
    if view.get("concepts"):
        lines.append("Main factors:")
        for c in view["concepts"]:
            name = f"{c['description']} ({c['concept']})" if c.get("description") else c["concept"]
            extra = f" [features: {', '.join(c['features'])}]" if "features" in c else ""
            lines.append(f"  - {name} {c['effect']} the forecast{extra}")
    if view.get("actionable"):
        lines.append(f"Actionable: {view['actionable']['concept']} can be influenced")
    if view.get("events"):
        lines.append("Related media events:")
        lines.extend(f"  - {e['date']}: {e['title']}" for e in view["events"])
    if view.get("keywords"):
        lines.append("Frequent keywords: " + ", ".join(view["keywords"]))
    if view.get("dataset"):
        d = view["dataset"]
        lines.append(f"Suggested dataset: {d['title']} ({d['uri']})")
    return "\n".join(lines) + "\n"
