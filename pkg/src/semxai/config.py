"""Pipeline configuration loading."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import yaml

from .analyzer import AnalyzerConfig
from .forecasting.svr import SVRSchedule

REQUIRED_INPUTS = ("demand", "indicators", "plan", "working_days", "events", "datasets", "embeddings")
# optional inputs fall back to these bundled resources
DEFAULT_RESOURCES = {
    "feature_specs": "feature_specs.yaml",
    "hierarchy": "hierarchy.yaml",
    "mapping_rules": "mapping_rules.yaml",
    "stopwords": "stopwords.txt",
    "lexicon": "nouns.txt",
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DisplayCounts:
    events: int = 3
    keywords: int = 3
    datasets: int = 1
    event_pool: int = 10
    keyword_pool: int = 10
    dataset_pool: int = 10


@dataclass(frozen=True)
class ForecastSettings:
    grid: tuple[dict, ...] = ({"C": 1.0, "epsilon": 2.0}, {"C": 100.0, "epsilon": 2.0})
    explain_months: int = 3
    residual_months: int = 3
    min_train: int = 6
    inner_months: int = 2
    quantiles: tuple[float, float] = (0.1, 0.9)
    schedule: SVRSchedule = SVRSchedule()


@dataclass
class PipelineConfig:
    inputs: dict[str, Path]
    seed: int = 42
    region: Optional[str] = None
    retention_days: int = 1095
    closeness_days: int = 15
    max_events_per_query: int = 20
    min_level: int = 1
    forecasting: ForecastSettings = field(default_factory=ForecastSettings)
    analyzer: AnalyzerConfig = field(default_factory=AnalyzerConfig)
    display: DisplayCounts = field(default_factory=DisplayCounts)
    materials: Optional[list[str]] = None
    months: Optional[list[str]] = None
    raw: dict = field(default_factory=dict)

    def digest(self) -> str:
        """Hash of the effective configuration and the bytes of every input file."""
        h = hashlib.sha256(json.dumps(self.raw, sort_keys=True, default=str).encode())
        for name in sorted(self.inputs):
            h.update(name.encode())
            h.update(hashlib.sha256(Path(self.inputs[name]).read_bytes()).digest())
        return h.hexdigest()

    def check_inputs(self) -> None:
        missing = [f"{k}: {p}" for k, p in sorted(self.inputs.items()) if not Path(p).is_file()]
        if missing:
            raise ConfigError("missing input files: " + "; ".join(missing))


def _positive(name, value):
    if int(value) < 1:
        raise ConfigError(f"{name} must be >= 1, got {value}")
    return int(value)


def parse_config(doc: dict, base_dir: Path, seed_override: Optional[int] = None) -> PipelineConfig:
    doc = dict(doc or {})
    given = dict(doc.get("inputs") or {})
    missing = [k for k in REQUIRED_INPUTS if not given.get(k)]
    if missing:
        raise ConfigError(f"config lacks inputs {missing}")
    inputs = {}
    for key, value in given.items():
        if value:
            p = Path(value)
            inputs[key] = p if p.is_absolute() else (base_dir / p)
    data = resources.files("semxai.data")
    for key, name in DEFAULT_RESOURCES.items():
        if key not in inputs:
            with resources.as_file(data / name) as p:
                inputs[key] = Path(p)
    unknown = set(inputs) - set(REQUIRED_INPUTS) - set(DEFAULT_RESOURCES)
    if unknown:
        raise ConfigError(f"unknown inputs {sorted(unknown)}")

    if seed_override is not None:
        doc["seed"] = int(seed_override)
    f = doc.get("forecasting") or {}
    sched = f.get("schedule") or {}
    grid = tuple({"C": float(g["C"]), "epsilon": float(g["epsilon"])} for g in f.get("grid") or ForecastSettings.grid)
    forecasting = ForecastSettings(
        grid=grid,
        explain_months=_positive("explain_months", f.get("explain_months", 3)),
        residual_months=_positive("residual_months", f.get("residual_months", 3)),
        min_train=int(f.get("min_train", 6)),
        inner_months=_positive("inner_months", f.get("inner_months", 2)),
        quantiles=tuple(float(q) for q in f.get("quantiles", (0.1, 0.9))),
        schedule=SVRSchedule(int(sched.get("n_iter", 3000)), float(sched.get("eta0", 0.5)),
                             float(sched.get("average_from", 0.5))),
    )
    a = doc.get("analyzer") or {}
    analyzer = AnalyzerConfig(
        n_samples=int(a.get("n_samples", 1000)),
        kernel_width=a.get("sigma"),
        top_k_features=_positive("top_k", a.get("top_k", 4)),
        seed=int(a.get("seed", 0)),
        ridge=float(a.get("lambda", 1e-6)),
    )
    d = doc.get("display") or {}
    display = DisplayCounts(**{k: _positive(k, v) for k, v in d.items()})
    c = doc.get("context") or {}
    sel = doc.get("select") or {}
    raw = {**doc, "inputs": {k: str(v) for k, v in sorted(given.items())}}
    return PipelineConfig(
        inputs=inputs,
        seed=int(doc.get("seed", 42)),
        region=doc.get("region"),
        retention_days=_positive("retention_days", doc.get("retention_days", 1095)),
        closeness_days=int(c.get("closeness_days", 15)),
        max_events_per_query=_positive("max_events_per_query", c.get("max_events_per_query", 20)),
        min_level=_positive("min_level", c.get("min_level", 1)),
        forecasting=forecasting,
        analyzer=analyzer,
        display=display,
        materials=sel.get("materials"),
        months=sel.get("months"),
        raw=raw,
    )


def load_config(path, seed_override: Optional[int] = None) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    return parse_config(doc, path.parent, seed_override)


def fixture_config_path() -> Path:
    with resources.as_file(resources.files("semxai.data") / "fixture" / "pipeline.yaml") as p:
        return Path(p)
