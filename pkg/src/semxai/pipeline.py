"""End-to-end batch run: ingest, forecast, analyze, contextualize, explain, persist."""

from __future__ import annotations

import datetime as dt
import json
import logging
import zlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analyzer import explain_instance
from .config import PipelineConfig
from .explain import (
    EventEvidence,
    ForecastExplanation,
    abstract_concepts,
    actionable_highlight,
    assemble,
)
from .forecasting.features import FeatureVector, MissingData, build_feature_vector, expand_keywords, load_feature_specs
from .forecasting.series import read_demand, read_indicators, read_plan, read_working_days
from .forecasting.uncertainty import predict_with_uncertainty
from .forecasting.validation import nested_cv
from .kg import (
    ConceptLabel,
    KnowledgeGraph,
    Relation,
    apply_mapping,
    install_hierarchy,
    load_hierarchy,
    load_rules,
)
from .media import FixtureEventBackend, MediaEvent, build_queries, extract_keywords, retrieve_events
from .recommender import (
    FixtureDatasetBackend,
    bag_from_counts,
    diversity_sample,
    load_dataset_metadata,
    load_embeddings,
    rank_datasets,
)
from .text import LexiconTagger, is_alpha, read_token_list, tokenize
from .timeutil import Month

logger = logging.getLogger(__name__)

ALGORITHM = "linear epsilon-SVR"


@dataclass
class Inputs:
    demand: dict
    plan: dict
    indicators: list
    specs: list
    events: FixtureEventBackend
    datasets: list
    embeddings: object
    stopwords: frozenset
    tagger: LexiconTagger
    hierarchy: dict
    descriptions: dict
    rules: list


@dataclass
class RunResult:
    explanations: list[ForecastExplanation] = field(default_factory=list)
    predictions: list = field(default_factory=list)
    kg: Optional[KnowledgeGraph] = None
    manifest: dict = field(default_factory=dict)
    feature_vectors: list[FeatureVector] = field(default_factory=list)
    cv_results: dict = field(default_factory=dict)


def load_inputs(config: PipelineConfig) -> Inputs:
    config.check_inputs()
    p = config.inputs
    hierarchy, descriptions = load_hierarchy(p["hierarchy"])
    return Inputs(
        demand=read_demand(p["demand"], read_working_days(p["working_days"])),
        plan=read_plan(p["plan"]),
        indicators=read_indicators(p["indicators"]),
        specs=load_feature_specs(p["feature_specs"]),
        events=FixtureEventBackend.from_jsonl(p["events"], config.max_events_per_query),
        datasets=load_dataset_metadata(p["datasets"]),
        embeddings=load_embeddings(p["embeddings"]),
        stopwords=frozenset(read_token_list(p["stopwords"])),
        tagger=LexiconTagger(read_token_list(p["lexicon"])),
        hierarchy=hierarchy,
        descriptions=descriptions,
        rules=load_rules(p["mapping_rules"]),
    )


def _read_jsonl(path) -> list[dict]:
    return [json.loads(ln) for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]


def ingest(config: PipelineConfig, inputs: Inputs) -> tuple[KnowledgeGraph, dict]:
    kg = KnowledgeGraph()
    install_hierarchy(kg, inputs.hierarchy, {s.id: s.abstraction_leaf for s in inputs.specs},
                      inputs.descriptions, {s.id: s.actionable for s in inputs.specs})
    kg.upsert_node(ConceptLabel.ALGORITHM, {"name": ALGORITHM})
    demand_records = [
        {"material_id": mat, "month": str(m), "quantity": q}
        for mat, series in inputs.demand.items() for m, q in series.observations.items()
    ]
    records = {
        "demand": demand_records,
        "events": [e.to_record() for e in inputs.events.events],
        "datasets": [d.to_record() for d in inputs.datasets],
    }
    summary = apply_mapping(kg, records, inputs.rules)
    return kg, {"nodes_created": summary.nodes_created, "edges_created": summary.edges_created,
                "records_skipped": summary.records_skipped}


def _seed(base: int, *parts) -> int:
    return (base * 1_000_003 + zlib.crc32("|".join(map(str, parts)).encode())) % (2**32)


def feature_rows(series, plan, indicators, specs, region):
    """All months with a complete feature vector, oldest first."""
    vectors, skipped = [], 0
    for month in series.months():
        try:
            vectors.append(build_feature_vector(series, indicators, plan, month, specs, region))
        except MissingData:
            skipped += 1
    return vectors, skipped


def _query_bag(ranking, specs, keyword_stats, stopwords, table):
    counts: Counter[str] = Counter()
    for fid, _ in ranking:
        for phrase in expand_keywords(fid, specs):
            counts.update(t for t in tokenize(phrase) if is_alpha(t) and t not in stopwords)
    for stat in keyword_stats:
        counts[stat.lemma] += stat.frequency
    return bag_from_counts(counts, table), sorted(counts)


def explain_month(config, inputs, kg, material, vector, model, residual_pool, counts):
    seed = _seed(config.seed, material, vector.target_month)
    q_low, q_high = config.forecasting.quantiles
    prediction = predict_with_uncertainty(model, vector, residual_pool, q_low, q_high)

    analyzer_cfg = config.analyzer
    analyzer_cfg = type(analyzer_cfg)(analyzer_cfg.n_samples, analyzer_cfg.kernel_width,
                                      analyzer_cfg.top_k_features, _seed(analyzer_cfg.seed, seed),
                                      analyzer_cfg.ridge)
    surrogate = explain_instance(model.predict, vector.as_array(), model.feature_mean,
                                 model.feature_scale, analyzer_cfg, vector.feature_ids)
    ranking = [(fid, surrogate.coefficients[fid]) for fid in surrogate.ranking]

    queries = build_queries(ranking, inputs.specs, vector.target_month, config.closeness_days, vector)
    provenance: dict[str, list[str]] = {}
    pool: list[MediaEvent] = []
    for query in queries:
        for event in retrieve_events(query, inputs.events, config.max_events_per_query):
            if event.id not in provenance:
                provenance[event.id] = []
                pool.append(event)
            if query.feature_id not in provenance[event.id]:
                provenance[event.id].append(query.feature_id)
    counts["queries"] += len(queries)
    counts["events_retrieved"] += len(pool)
    shown = config.display
    picked = diversity_sample(pool, shown.event_pool, shown.events, _seed(seed, "events"))
    events = [EventEvidence(e, tuple(provenance[e.id])) for e in picked]

    stats = extract_keywords(pool, inputs.stopwords, inputs.tagger)
    counts["keywords_extracted"] += len(stats)
    keywords = [s.lemma for s in diversity_sample(stats, shown.keyword_pool, shown.keywords,
                                                  _seed(seed, "keywords"))]

    bag, words = _query_bag(ranking, inputs.specs, stats, inputs.stopwords, inputs.embeddings)
    candidates = FixtureDatasetBackend(inputs.datasets).search(words)
    counts["dataset_candidates"] += len(candidates)
    ranked = rank_datasets(bag, candidates, inputs.embeddings, top_n=shown.dataset_pool,
                           stopwords=inputs.stopwords)
    dataset = diversity_sample(ranked, shown.dataset_pool, shown.datasets, _seed(seed, "datasets"))[0].metadata

    highlights = abstract_concepts(ranking, kg, config.min_level)
    note = actionable_highlight(ranking, inputs.specs, kg, config.min_level)
    explanation = assemble(prediction, highlights, note, events, keywords, dataset, kg,
                           n_events=shown.events, n_keywords=shown.keywords)
    # link the prediction to its model and feature vector
    pred_node = kg.find(ConceptLabel.PREDICTION, material=material, month=str(vector.target_month))
    model_node, _ = kg.upsert_node(ConceptLabel.REGRESSION_MODEL, {
        "model_id": f"{material}-{vector.target_month}", "algorithm": ALGORITHM,
        "hyperparameters": {"C": model.C, "epsilon": model.epsilon},
    }, vector.target_month.start())
    kg.add_edge(model_node.id, Relation.DESCRIBED_BY, kg.find(ConceptLabel.ALGORITHM, name=ALGORITHM).id)
    kg.add_edge(pred_node.id, Relation.PREDICTED_BY, model_node.id)
    fv_node, _ = kg.upsert_node(ConceptLabel.FEATURE_VECTOR, {
        "material": material, "month": str(vector.target_month),
        "values": {v.feature_id: v.value for v in vector.values},
    }, vector.target_month.start())
    kg.add_edge(pred_node.id, Relation.DESCRIBED_BY, fv_node.id)
    product = kg.find(ConceptLabel.PRODUCT, material=material)
    if product is not None:
        kg.add_edge(pred_node.id, Relation.DESCRIBED_BY, product.id)
    for v in vector.values:
        kg.add_edge(fv_node.id, Relation.HAS_ATTRIBUTE, kg.find(ConceptLabel.ATTRIBUTE, feature_id=v.feature_id).id)
    return prediction, explanation


def run_pipeline(config: PipelineConfig, out_dir=None) -> RunResult:
    inputs = load_inputs(config)  # fails before any output is written
    kg, ingest_summary = ingest(config, inputs)
    counts: Counter[str] = Counter()
    failures = []
    result = RunResult(kg=kg)
    fc = config.forecasting
    materials = config.materials or sorted(inputs.demand)
    for material in materials:
        series = inputs.demand[material]
        vectors, skipped = feature_rows(series, inputs.plan.get(material), inputs.indicators,
                                        inputs.specs, config.region)
        counts["rows_skipped_missing_data"] += skipped
        counts["feature_rows"] += len(vectors)
        result.feature_vectors.extend(vectors)
        months = [v.target_month for v in vectors]
        X = np.stack([v.as_array() for v in vectors])
        y = np.array([series.get(m) for m in months])
        cv = nested_cv(months, X, y, fc.grid, fc.explain_months + fc.residual_months,
                       min_train=fc.min_train, inner_months=fc.inner_months,
                       schedule=fc.schedule, feature_ids=vectors[0].feature_ids)
        result.cv_results[material] = cv
        targets = [Month.parse(m) for m in config.months] if config.months else months[-fc.explain_months:]
        for vector in vectors:
            if vector.target_month not in targets:
                continue
            fold = cv.fold_for(vector.target_month)
            try:
                prediction, explanation = explain_month(
                    config, inputs, kg, material, vector, fold.model,
                    cv.residuals_before(vector.target_month), counts)
            except Exception as exc:  # skip the pair, report it, continue
                logger.warning("skipping %s %s: %s", material, vector.target_month, exc)
                failures.append({"material": material, "month": str(vector.target_month),
                                 "error": f"{type(exc).__name__}: {exc}"})
                continue
            result.predictions.append(prediction)
            result.explanations.append(explanation)

    last = max(m for s in inputs.demand.values() for m in s.months())
    now = (last + 1).start() - dt.timedelta(days=1)
    pruned = kg.prune_window(now, dt.timedelta(days=config.retention_days))
    kg.validate()
    result.manifest = {
        "version": __version__,
        "config_sha256": config.digest(),
        "seed": config.seed,
        "stages": {
            "ingest": ingest_summary,
            "forecast": {"materials": len(materials), **{k: counts[k] for k in
                         ("feature_rows", "rows_skipped_missing_data")}},
            "context": {k: counts[k] for k in ("queries", "events_retrieved", "keywords_extracted",
                                               "dataset_candidates")},
            "explain": {"explanations": len(result.explanations), "failures": len(failures)},
            "kg": {"nodes": len(kg.nodes), "edges": len(kg.edges), "pruned": pruned},
        },
        "failures": failures,
    }
    if out_dir is not None:
        write_outputs(result, out_dir)
    return result


def _dump_jsonl(path: Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_outputs(result: RunResult, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    explanations = sorted(result.explanations, key=lambda e: e.id)
    _dump_jsonl(out / "explanations.jsonl", (e.to_record() for e in explanations))
    _dump_jsonl(out / "predictions.jsonl",
                sorted((p.to_record() for p in result.predictions), key=lambda r: (r["material"], r["month"])))
    result.kg.export_jsonl(out / "kg.jsonl")
    (out / "manifest.json").write_text(json.dumps(result.manifest, indent=2, sort_keys=True) + "\n")
    with open(out / "annotation_template.csv", "w", encoding="utf-8") as fh:
        # relevance column is left blank for annotators
        fh.write("explanation_id,item_kind,rank,item_id,relevant\n")
        for e in explanations:
            for r, ev in enumerate(e.events, 1):
                fh.write(f"{e.id},event,{r},{ev.event.id},\n")
            for r, kw in enumerate(e.keywords, 1):
                fh.write(f"{e.id},keyword,{r},{kw},\n")
            fh.write(f"{e.id},dataset,1,{e.dataset.id},\n")
    return out


def ingest_only(config: PipelineConfig, out_dir=None) -> tuple[KnowledgeGraph, dict]:
    inputs = load_inputs(config)
    kg, summary = ingest(config, inputs)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        # separate name so an ingest never clobbers the graph of a full run
        kg.export_jsonl(out / "ingest_kg.jsonl")
        (out / "ingest_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return kg, summary
