import json
import shutil

import pytest
import yaml
from click.testing import CliRunner

from semxai.cli import main
from semxai.config import ConfigError, fixture_config_path, load_config
from semxai.explain import ForecastExplanation, exposed_feature_ids, redact, render_text
from semxai.kg import ConceptLabel as L, KnowledgeGraph
from semxai.pipeline import run_pipeline

IDS = list("ABCDEFGHIJKLM")
OUTPUTS = ["explanations.jsonl", "predictions.jsonl", "kg.jsonl", "manifest.json", "annotation_template.csv"]


def test_fifteen_well_formed_explanations(fixture_run):
    result, out = fixture_run
    recs = [json.loads(ln) for ln in (out / "explanations.jsonl").read_text().splitlines()]
    assert len(recs) == 15
    assert sorted({r["prediction"]["material"] for r in recs}) == ["M1", "M2", "M3", "M4", "M5"]
    assert sorted({r["prediction"]["month"] for r in recs}) == ["2020-04", "2020-05", "2020-06"]
    for r in recs:
        assert len({e["id"] for e in r["events"]}) == 3
        assert len(set(r["keywords"])) == 3
        assert r["dataset"]["id"]
        p = r["prediction"]
        assert 0 <= p["lower"] <= p["value"] <= p["upper"]
        view = redact(ForecastExplanation.from_record(r), "planner")
        assert exposed_feature_ids(view, IDS) == []
        assert exposed_feature_ids({"t": render_text(view)}, IDS) == []
    assert result.manifest["failures"] == []
    assert result.manifest["stages"]["explain"]["explanations"] == 15


def test_event_provenance_traces_to_ranked_features(fixture_run):
    result, _ = fixture_run
    for expl in result.explanations:
        ranked = {f for h in expl.concept_highlights for f in h.underlying_feature_ids}
        for ev in expl.events:
            assert ev.feature_ids and set(ev.feature_ids) <= ranked


def test_temporal_hygiene(fixture_run):
    result, _ = fixture_run
    assert len(result.feature_vectors) == result.manifest["stages"]["forecast"]["feature_rows"]
    bad = [(fv.material, fv.target_month, v.feature_id) for fv in result.feature_vectors
           for v in fv.values if any(r >= fv.target_month for r in v.reference_months)]
    assert bad == []
    for cv in result.cv_results.values():
        assert all(max(f.train_months) < f.test_month for f in cv.folds)


def test_kg_links_predictions(fixture_run):
    result, out = fixture_run
    kg = KnowledgeGraph.import_jsonl(out / "kg.jsonl")
    rows = kg.query("(x:ForecastExplanation)-[explains]->(p:Prediction)-[predictedBy]->(m:RegressionModel)")
    assert len(rows) == 15
    assert len(kg.query("(p:Prediction)-[describedBy]->(v:FeatureVector)-[hasAttribute]->(a:Attribute)")) == 15 * 13
    kg.validate()
    assert len(kg.by_label(L.FORECAST_EXPLANATION)) == 15


def test_second_run_byte_identical(fixture_run, tmp_path):
    _, first = fixture_run
    run_pipeline(load_config(fixture_config_path()), tmp_path)
    for name in OUTPUTS:
        assert (tmp_path / name).read_bytes() == (first / name).read_bytes(), name


def copy_fixture(tmp_path):
    src = fixture_config_path().parent
    dst = tmp_path / "fixture"
    shutil.copytree(src, dst)
    return dst


def test_missing_embeddings_fails_before_output(tmp_path):
    fx = copy_fixture(tmp_path)
    (fx / "embeddings.bin").unlink()
    cfg = load_config(fx / "pipeline.yaml")
    out = tmp_path / "out"
    with pytest.raises(ConfigError, match="embeddings"):
        run_pipeline(cfg, out)
    assert not out.exists()


def test_config_validation(tmp_path):
    fx = copy_fixture(tmp_path)
    doc = yaml.safe_load((fx / "pipeline.yaml").read_text())
    del doc["inputs"]["events"]
    (fx / "bad.yaml").write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError):
        load_config(fx / "bad.yaml")
    doc = yaml.safe_load((fx / "pipeline.yaml").read_text())
    doc["display"]["events"] = 0
    (fx / "bad2.yaml").write_text(yaml.safe_dump(doc))
    with pytest.raises(ConfigError):
        load_config(fx / "bad2.yaml")
    cfg = load_config(fx / "pipeline.yaml", seed_override=5)
    assert cfg.seed == 5 and cfg.digest() != load_config(fx / "pipeline.yaml").digest()


def test_selection_and_partial_failure(tmp_path):
    fx = copy_fixture(tmp_path)
    doc = yaml.safe_load((fx / "pipeline.yaml").read_text())
    doc["select"] = {"materials": ["M2"], "months": ["2020-06"]}
    # a keyword pool of two cannot fill three distinct keywords
    doc["display"]["keyword_pool"] = 2
    (fx / "sel.yaml").write_text(yaml.safe_dump(doc))
    result = run_pipeline(load_config(fx / "sel.yaml"), tmp_path / "out")
    assert result.explanations == []
    (failure,) = result.manifest["failures"]
    assert failure["material"] == "M2" and failure["month"] == "2020-06"
    assert "MissingSection" in failure["error"]
    assert (tmp_path / "out" / "explanations.jsonl").read_text() == ""


def test_cli_commands(fixture_run, tmp_path):
    _, out = fixture_run
    runner = CliRunner()
    res = runner.invoke(main, ["--out-dir", str(tmp_path), "ingest"])
    assert res.exit_code == 0 and json.loads(res.output)["records_skipped"] == 0
    assert (tmp_path / "ingest_kg.jsonl").exists()
    csv = tmp_path / "ann.csv"
    lines = (out / "annotation_template.csv").read_text().splitlines()
    csv.write_text("\n".join([lines[0]] + [ln + "1" for ln in lines[1:]]) + "\n")
    res = runner.invoke(main, ["--out-dir", str(tmp_path / "eval"), "evaluate", "--annotations", str(csv)])
    assert res.exit_code == 0, res.output
    report = json.loads((tmp_path / "eval" / "report.json").read_text())
    assert report["n_explanations"] == 15 and report["datasets_accuracy"] == 1.0
    bad = tmp_path / "bad.csv"
    bad.write_text("explanation_id,item_kind,rank,item_id,relevant\nx,event,9,a,1\n")
    res = runner.invoke(main, ["evaluate", "--annotations", str(bad)])
    assert res.exit_code != 0 and "line 2" in res.output
    res = runner.invoke(main, ["--config", str(tmp_path / "nope.yaml"), "explain"])
    assert res.exit_code != 0 and "not found" in res.output
