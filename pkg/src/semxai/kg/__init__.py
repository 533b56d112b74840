from .graph import (
    CycleDetected,
    DanglingEdge,
    KGEdge,
    KGNode,
    KnowledgeGraph,
    ReadOnlyGraph,
    SchemaViolation,
    UnknownAttribute,
    parse_pattern,
)
from .hierarchy import install_hierarchy, load_hierarchy
from .mapping import IngestionSummary, MappingRule, apply_mapping, load_rules, parse_rule, validate_rules
from .ontology import (
    LABEL_SCHEMAS,
    RELATION_SCHEMA,
    ConceptLabel,
    Relation,
    UnknownLabel,
    UnknownRelation,
    node_id_for,
)
