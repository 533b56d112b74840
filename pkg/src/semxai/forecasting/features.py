"""Feature specifications and point-in-time feature vector construction."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping, Optional, Sequence

import yaml

from ..timeutil import Month
from .series import DemandSeries, IndicatorSeries, MonthlySeries, PlanSeries

AGGREGATIONS = (
    "raw",
    "working-day-average",
    "past-weighted-average",
    "min-max-scaled",
    "ratio",
    "difference",
)
SOURCES = ("demand", "plan", "GDP", "PMI", "UE")

_REF_RE = re.compile(r"^\s*(?:\+\s*keywords\s+listed\s+in|same\s+as)\s+([A-Z])\s*$", re.I)


class MissingData(LookupError):
    def __init__(self, feature_id: str, source: str, month: Month):
        super().__init__(f"feature {feature_id}: no {source} value for {month}")
        self.feature_id = feature_id
        self.source = source
        self.month = month


@dataclass(frozen=True)
class FeatureDefinition:
    source: str
    lags: tuple[int, ...]
    aggregation: str = "raw"
    weights: Optional[tuple[float, ...]] = None
    denominator: Optional[str] = None

    def __post_init__(self):
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if not self.lags or any(lag < 1 for lag in self.lags):
            # lag 0 would read the target month itself
            raise ValueError("lags must be >= 1 month")
        if self.aggregation == "past-weighted-average":
            if self.weights is None or len(self.weights) != len(self.lags):
                raise ValueError("past-weighted-average needs one weight per lag")
            if not math.isclose(sum(self.weights), 1.0, abs_tol=1e-9):
                raise ValueError("weights must sum to 1")
        if self.aggregation == "difference" and len(self.lags) != 2:
            raise ValueError("difference needs exactly two lags")
        if self.aggregation == "ratio" and self.denominator not in SOURCES:
            raise ValueError("ratio needs a denominator source")


@dataclass(frozen=True)
class FeatureSpec:
    id: str
    actionable: bool
    definition: FeatureDefinition
    mers_keywords: tuple[str, ...]
    abstraction_leaf: str

    def __post_init__(self):
        if not self.mers_keywords:
            raise ValueError(f"feature {self.id} has no keywords")


@dataclass(frozen=True)
class FeatureValue:
    feature_id: str
    value: float
    reference_months: tuple[Month, ...]


@dataclass
class FeatureVector:
    material: str
    target_month: Month
    values: list[FeatureValue] = field(default_factory=list)

    @property
    def feature_ids(self) -> list[str]:
        return [v.feature_id for v in self.values]

    def as_array(self):
        import numpy as np

        return np.array([v.value for v in self.values], dtype=float)

    def reference_months(self, feature_id: str) -> tuple[Month, ...]:
        for v in self.values:
            if v.feature_id == feature_id:
                return v.reference_months
        raise KeyError(feature_id)


def parse_specs(doc: Mapping) -> list[FeatureSpec]:
    specs = []
    for f in doc["features"]:
        d = f["definition"]
        definition = FeatureDefinition(
            source=d["source"],
            lags=tuple(int(x) for x in d["lags"]),
            aggregation=d.get("aggregation", "raw"),
            weights=tuple(float(w) for w in d["weights"]) if d.get("weights") else None,
            denominator=d.get("denominator"),
        )
        specs.append(FeatureSpec(
            id=str(f["id"]),
            actionable=bool(f["actionable"]),
            definition=definition,
            mers_keywords=tuple(str(k) for k in f["keywords"]),
            abstraction_leaf=str(f["abstraction"]),
        ))
    ids = [s.id for s in specs]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate feature ids")
    return specs


def load_feature_specs(path=None) -> list[FeatureSpec]:
    if path is None:
        text = (resources.files("semxai.data") / "feature_specs.yaml").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_specs(yaml.safe_load(text))


def expand_keywords(feature_id: str, specs: Sequence[FeatureSpec] | Mapping[str, FeatureSpec]) -> list[str]:
    """Resolve "same as X" / "+ keywords listed in X" references, keeping first-seen order."""
    by_id = specs if isinstance(specs, Mapping) else {s.id: s for s in specs}

    def walk(fid: str, stack: tuple[str, ...]) -> list[str]:
        if fid in stack:
            raise ValueError(f"keyword references cycle: {' -> '.join(stack + (fid,))}")
        if fid not in by_id:
            raise KeyError(f"keyword reference to unknown feature {fid!r}")
        out: list[str] = []
        for kw in by_id[fid].mers_keywords:
            m = _REF_RE.match(kw)
            out.extend(walk(m.group(1).upper(), stack + (fid,)) if m else [kw.strip()])
        return out

    seen: dict[str, None] = {}
    for kw in walk(feature_id, ()):
        seen.setdefault(kw, None)
    return list(seen)


def _source_series(source: str, series: DemandSeries, plan: Optional[PlanSeries],
                   indicators: Sequence[IndicatorSeries], region: Optional[str]) -> Optional[MonthlySeries]:
    if source == "demand":
        return series
    if source == "plan":
        return plan
    for ind in indicators:
        if ind.indicator == source and (region is None or ind.region == region):
            return ind
    return None


def compute_feature(spec: FeatureSpec, series: DemandSeries, indicators: Sequence[IndicatorSeries],
                    plan: Optional[PlanSeries], target: Month, region: Optional[str] = None) -> FeatureValue:
    d = spec.definition
    src = _source_series(d.source, series, plan, indicators, region)

    def at(s: Optional[MonthlySeries], name: str, lag: int) -> float:
        month = target - lag
        value = s.get(month) if s is not None else None
        if value is None:
            raise MissingData(spec.id, name, month)
        return value

    refs = tuple(target - lag for lag in d.lags)
    if d.aggregation == "raw":
        value = at(src, d.source, d.lags[0])
    elif d.aggregation == "working-day-average":
        month = target - d.lags[0]
        days = series.working_days.get(month)
        if not days:
            raise MissingData(spec.id, "working_days", month)
        value = at(src, d.source, d.lags[0]) / days
    elif d.aggregation == "past-weighted-average":
        value = sum(w * at(src, d.source, lag) for w, lag in zip(d.weights, d.lags))
    elif d.aggregation == "min-max-scaled":
        raw = at(src, d.source, d.lags[0])
        history = src.before(target)
        lo, hi = min(history), max(history)
        value = (raw - lo) / (hi - lo) if hi > lo else 0.0
    elif d.aggregation == "ratio":
        den_src = _source_series(d.denominator, series, plan, indicators, region)
        num = at(src, d.source, d.lags[0])
        den = at(den_src, d.denominator, d.lags[0])
        value = num / den if den else 0.0
    else:  # difference
        value = at(src, d.source, d.lags[0]) - at(src, d.source, d.lags[1])
    return FeatureValue(spec.id, float(value), refs)


def build_feature_vector(series: DemandSeries, indicators: Sequence[IndicatorSeries],
                         plan: Optional[PlanSeries], target_month, specs: Sequence[FeatureSpec],
                         region: Optional[str] = None) -> FeatureVector:
    """Feature values for ``target_month`` using only observations from earlier months.

    Raises MissingData naming the first feature whose input month is absent.
    """
    target = Month.of(target_month)
    values = [compute_feature(s, series, indicators, plan, target, region) for s in specs]
    return FeatureVector(series.material, target, values)
