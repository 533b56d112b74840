"""Ontology schema: concept labels, their properties and the relation table."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class ConceptLabel(str, Enum):
    PRODUCT = "Product"
    EVENT = "Event"
    MEDIA_REPORTED_EVENT = "MediaReportedEvent"
    MEDIA_REPORTED_EVENT_KEYWORD = "MediaReportedEventKeyword"
    EXTERNAL_DATASET_METADATA = "ExternalDatasetMetadata"
    FORECAST_EXPLANATION = "ForecastExplanation"
    ATTRIBUTE = "Attribute"
    ATTRIBUTE_ABSTRACTION = "AttributeAbstraction"
    FEATURE_VECTOR = "FeatureVector"
    DATASET_SPECIFICATION = "DatasetSpecification"
    DATASET = "Dataset"
    ALGORITHM = "Algorithm"
    REGRESSION_MODEL = "RegressionModel"
    PREDICTION = "Prediction"
    INFORMATION_PROVENANCE = "InformationProvenance"


class Relation(str, Enum):
    HAS_ATTRIBUTE = "hasAttribute"
    ABSTRACTED_BY = "abstractedBy"
    PARENT_CONCEPT = "parentConcept"
    EXPLAINS = "explains"
    EVIDENCED_BY = "evidencedBy"
    HAS_KEYWORD = "hasKeyword"
    RECOMMENDS_DATASET = "recommendsDataset"
    PREDICTED_BY = "predictedBy"
    DESCRIBED_BY = "describedBy"
    FROM_PROVENANCE = "fromProvenance"


@dataclass(frozen=True)
class LabelSchema:
    key: tuple[str, ...]
    optional: tuple[str, ...] = ()

    @property
    def properties(self) -> frozenset[str]:
        return frozenset(self.key) | frozenset(self.optional)


L = ConceptLabel
R = Relation

LABEL_SCHEMAS: dict[ConceptLabel, LabelSchema] = {
    L.PRODUCT: LabelSchema(("material",), ("name",)),
    L.EVENT: LabelSchema(("event_id",), ("date",)),
    L.MEDIA_REPORTED_EVENT: LabelSchema(("event_id",), ("date", "title", "body", "source")),
    L.MEDIA_REPORTED_EVENT_KEYWORD: LabelSchema(("lemma",)),
    L.EXTERNAL_DATASET_METADATA: LabelSchema(
        ("dataset_id",), ("title", "description", "publisher", "uri")
    ),
    L.FORECAST_EXPLANATION: LabelSchema(
        ("explanation_id",), ("material", "month", "concepts", "actionable")
    ),
    L.ATTRIBUTE: LabelSchema(("feature_id",), ("actionable", "description")),
    L.ATTRIBUTE_ABSTRACTION: LabelSchema(("name",), ("description",)),
    L.FEATURE_VECTOR: LabelSchema(("material", "month"), ("values", "quantity")),
    L.DATASET_SPECIFICATION: LabelSchema(("name",), ("fields",)),
    L.DATASET: LabelSchema(("name",), ("uri",)),
    L.ALGORITHM: LabelSchema(("name",)),
    L.REGRESSION_MODEL: LabelSchema(("model_id",), ("algorithm", "hyperparameters")),
    L.PREDICTION: LabelSchema(("material", "month"), ("value", "lower", "upper")),
    L.INFORMATION_PROVENANCE: LabelSchema(("name",), ("uri",)),
}

# relation -> allowed (src label, dst label) pairs
RELATION_SCHEMA: dict[Relation, frozenset[tuple[ConceptLabel, ConceptLabel]]] = {
    R.HAS_ATTRIBUTE: frozenset({
        (L.PRODUCT, L.FEATURE_VECTOR),
        (L.FEATURE_VECTOR, L.ATTRIBUTE),
    }),
    R.ABSTRACTED_BY: frozenset({(L.ATTRIBUTE, L.ATTRIBUTE_ABSTRACTION)}),
    R.PARENT_CONCEPT: frozenset({(L.ATTRIBUTE_ABSTRACTION, L.ATTRIBUTE_ABSTRACTION)}),
    R.EXPLAINS: frozenset({(L.FORECAST_EXPLANATION, L.PREDICTION)}),
    R.EVIDENCED_BY: frozenset({(L.FORECAST_EXPLANATION, L.MEDIA_REPORTED_EVENT)}),
    R.HAS_KEYWORD: frozenset({
        (L.FORECAST_EXPLANATION, L.MEDIA_REPORTED_EVENT_KEYWORD),
        (L.MEDIA_REPORTED_EVENT, L.MEDIA_REPORTED_EVENT_KEYWORD),
    }),
    R.RECOMMENDS_DATASET: frozenset({(L.FORECAST_EXPLANATION, L.EXTERNAL_DATASET_METADATA)}),
    R.PREDICTED_BY: frozenset({(L.PREDICTION, L.REGRESSION_MODEL)}),
    R.DESCRIBED_BY: frozenset({
        (L.PREDICTION, L.FEATURE_VECTOR),
        (L.PREDICTION, L.PRODUCT),
        (L.REGRESSION_MODEL, L.ALGORITHM),
        (L.DATASET, L.DATASET_SPECIFICATION),
        (L.MEDIA_REPORTED_EVENT, L.EVENT),
    }),
    R.FROM_PROVENANCE: frozenset({
        (L.MEDIA_REPORTED_EVENT, L.INFORMATION_PROVENANCE),
        (L.EXTERNAL_DATASET_METADATA, L.INFORMATION_PROVENANCE),
        (L.DATASET, L.INFORMATION_PROVENANCE),
    }),
}


class UnknownLabel(ValueError):
    pass


class UnknownRelation(ValueError):
    pass


def label_of(value) -> ConceptLabel:
    try:
        return ConceptLabel(value)
    except ValueError:
        raise UnknownLabel(f"unknown concept label: {value!r}") from None


def relation_of(value) -> Relation:
    try:
        return Relation(value)
    except ValueError:
        raise UnknownRelation(f"unknown relation: {value!r}") from None


def node_id_for(label: ConceptLabel, key_values: dict) -> str:
    schema = LABEL_SCHEMAS[label]
    return label.value + ":" + "|".join(str(key_values[k]) for k in schema.key)
