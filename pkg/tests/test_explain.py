import datetime as dt
import json

import pytest

from semxai.explain import (
    PROFILES,
    DuplicateEvidence,
    ForecastExplanation,
    MissingSection,
    UnknownProfile,
    UnmappedFeature,
    abstract_concepts,
    actionable_highlight,
    assemble,
    exposed_feature_ids,
    redact,
    render_text,
)
from semxai.forecasting import Prediction, load_feature_specs
from semxai.kg import ConceptLabel as L, Relation as R
from semxai.media import MediaEvent
from semxai.recommender import DatasetMetadata
from semxai.timeutil import Month

SPECS = load_feature_specs()
IDS = [s.id for s in SPECS]


def test_shared_parent_merges_with_dominant_sign(hierarchy_kg):
    # F maps to SAPD and H to WAPD, both children of APD
    out = abstract_concepts([("F", 0.8), ("H", -0.3)], hierarchy_kg, min_level=2)
    assert [(h.concept, h.contribution_sign, h.underlying_feature_ids) for h in out] == [
        ("APD", "increases", ("F", "H"))]
    out = abstract_concepts([("H", -0.3), ("E", 0.1), ("F", 0.8)], hierarchy_kg, min_level=2)
    assert [(h.concept, h.contribution_sign) for h in out] == [("APD", "increases"), ("PD", "increases")]


def test_single_feature_level_one(hierarchy_kg):
    (h,) = abstract_concepts([("K", -1.0)], hierarchy_kg)
    assert h.concept == "PMI" and h.contribution_sign == "decreases"
    with pytest.raises(UnmappedFeature):
        abstract_concepts([("Z", 1.0)], hierarchy_kg)


def test_actionable_highlight(hierarchy_kg):
    note = actionable_highlight([("E", 0.9), ("A", 0.2)], SPECS, hierarchy_kg)
    assert (note.concept, note.feature_id) == ("CPS", "A")
    assert actionable_highlight([(f, 1.0) for f in "EFGHIJKLM"], SPECS) is None
    assert actionable_highlight([], SPECS) is None


def inputs():
    pred = Prediction("M1", Month.parse("2020-06"), 100.0, 90.0, 120.0)
    events = [MediaEvent(f"E{i}", dt.date(2020, 3, i + 1), f"title {i}", "", "wire") for i in range(3)]
    ds = DatasetMetadata("DS1", "Car registrations", "monthly", "office", "https://x.test/ds1")
    return pred, events, ["car", "sale", "demand"], ds


def test_assemble_persists_expected_edges(hierarchy_kg):
    pred, events, kws, ds = inputs()
    highlights = abstract_concepts([("A", 0.5), ("K", -0.2)], hierarchy_kg)
    note = actionable_highlight([("A", 0.5)], SPECS, hierarchy_kg)
    before = len(hierarchy_kg.edges)
    expl = assemble(pred, highlights, note, events, kws, ds, hierarchy_kg)
    assert expl.id == "M1-2020-06"
    node = hierarchy_kg.find(L.FORECAST_EXPLANATION, explanation_id=expl.id)
    out = hierarchy_kg.out_edges(node.id)
    rels = sorted(e.relation.value for e in out)
    assert rels.count("explains") == 1
    assert rels.count("evidencedBy") + rels.count("hasKeyword") == 6
    assert rels.count("recommendsDataset") == 1
    assert len(hierarchy_kg.edges) - before == 8
    rows = hierarchy_kg.query("(x:ForecastExplanation)-[evidencedBy]->(e:MediaReportedEvent)",
                              where={"x": {"explanation_id": expl.id}})
    assert [r["e"].properties["event_id"] for r in rows] == ["E0", "E1", "E2"]
    assert hierarchy_kg.query("(x:ForecastExplanation)-[explains]->(p:Prediction)")[0]["p"].properties["value"] == 100.0
    view = redact(expl, "expert")
    assert set(view) == {"prediction", "concepts", "actionable", "events", "keywords", "dataset"}


def test_assemble_rejects_bad_evidence(hierarchy_kg):
    pred, events, kws, ds = inputs()
    hl = abstract_concepts([("A", 0.5)], hierarchy_kg)
    with pytest.raises(DuplicateEvidence):
        assemble(pred, hl, None, [events[0], events[0], events[1]], kws, ds, hierarchy_kg)
    with pytest.raises(MissingSection):
        assemble(pred, hl, None, events[:2], kws, ds, hierarchy_kg)
    with pytest.raises(DuplicateEvidence):
        assemble(pred, hl, None, events, ["car", "car", "sale"], ds, hierarchy_kg)
    with pytest.raises(MissingSection):
        assemble(pred, hl, None, events, kws, None, hierarchy_kg)


def test_profiles_and_redaction(hierarchy_kg):
    pred, events, kws, ds = inputs()
    hl = abstract_concepts([("A", 0.5), ("J", 0.4), ("D", -0.1)], hierarchy_kg)
    expl = assemble(pred, hl, actionable_highlight([("A", 0.5)], SPECS, hierarchy_kg), events, kws, ds,
                    hierarchy_kg)
    planner, expert = redact(expl, "planner"), redact(expl, "expert")
    assert PROFILES["planner"].visible_sections < PROFILES["expert"].visible_sections
    assert set(planner) <= set(expert)
    assert "keywords" not in planner and "dataset" not in planner
    assert exposed_feature_ids(planner, IDS) == []
    assert exposed_feature_ids({"text": render_text(planner)}, IDS) == []
    assert set(exposed_feature_ids(expert, IDS)) == {"A", "D", "J"}
    with pytest.raises(UnknownProfile):
        redact(expl, "auditor")


def test_record_roundtrip(hierarchy_kg):
    pred, events, kws, ds = inputs()
    expl = assemble(pred, abstract_concepts([("F", 0.5)], hierarchy_kg), None, events, kws, ds, hierarchy_kg)
    rec = json.loads(json.dumps(expl.to_record()))
    assert ForecastExplanation.from_record(rec).to_record() == rec
    assert "Scaled Adjusted Past Demand" in render_text(redact(expl, "planner"))
