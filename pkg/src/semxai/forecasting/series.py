"""Monthly demand, planned-sales and indicator series plus their file readers."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..timeutil import Month

INDICATORS = ("GDP", "PMI", "UE")


@dataclass
class MonthlySeries:
    observations: dict[Month, float] = field(default_factory=dict)

    def __post_init__(self):
        self.observations = dict(sorted(self.observations.items()))

    def get(self, month: Month) -> Optional[float]:
        return self.observations.get(month)

    def months(self) -> list[Month]:
        return list(self.observations)

    def before(self, month: Month) -> list[float]:
        return [v for m, v in self.observations.items() if m < month]


@dataclass
class DemandSeries(MonthlySeries):
    material: str = ""
    working_days: dict[Month, int] = field(default_factory=dict)

    def __post_init__(self):
        super().__post_init__()
        if any(v < 0 for v in self.observations.values()):
            raise ValueError(f"negative demand for material {self.material}")


@dataclass
class PlanSeries(MonthlySeries):
    material: str = ""


@dataclass
class IndicatorSeries(MonthlySeries):
    indicator: str = ""
    region: str = ""

    def __post_init__(self):
        super().__post_init__()
        if self.indicator not in INDICATORS:
            raise ValueError(f"unknown indicator {self.indicator!r}")


def _rows(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _collect(rows, key, month_col, value_col, path) -> dict[str, dict[Month, float]]:
    out: dict[str, dict[Month, float]] = defaultdict(dict)
    for line, row in enumerate(rows, start=2):
        month = Month.parse(row[month_col])
        k = key(row)
        if month in out[k]:
            raise ValueError(f"{path}:{line}: duplicate month {month} for {k}")
        out[k][month] = float(row[value_col])
    return out


def read_working_days(path) -> dict[Month, int]:
    return {Month.parse(r["month"]): int(r["count"]) for r in _rows(path)}


def read_demand(path, working_days: Optional[dict[Month, int]] = None) -> dict[str, DemandSeries]:
    data = _collect(_rows(path), lambda r: r["material_id"], "month", "quantity", path)
    return {
        mat: DemandSeries(obs, material=mat, working_days=dict(working_days or {}))
        for mat, obs in sorted(data.items())
    }


def read_plan(path) -> dict[str, PlanSeries]:
    data = _collect(_rows(path), lambda r: r["material_id"], "month", "planned_qty", path)
    return {mat: PlanSeries(obs, material=mat) for mat, obs in sorted(data.items())}


def read_indicators(path) -> list[IndicatorSeries]:
    data = _collect(_rows(path), lambda r: (r["indicator"], r["region"]), "month", "value", path)
    return [IndicatorSeries(obs, indicator=ind, region=reg) for (ind, reg), obs in sorted(data.items())]


def write_csv(path, header: list[str], rows) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
