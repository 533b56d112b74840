"""Point forecasts with empirical-residual uncertainty intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from ..timeutil import Month
from .features import FeatureVector
from .svr import ForecastModel


class EmptyResidualPool(ValueError):
    pass


@dataclass
class Prediction:
    material: str
    target_month: Month
    value: float
    lower: float
    upper: float
    residual_pool: list[float] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "material": self.material,
            "month": str(self.target_month),
            "value": self.value,
            "lower": self.lower,
            "upper": self.upper,
        }


def empirical_quantile(pool: Sequence[float], q: float) -> float:
    """Nearest-rank quantile: the ceil(q*n)-th smallest value (q=0 gives the minimum)."""
    if not pool:
        raise EmptyResidualPool("residual pool is empty")
    ordered = sorted(pool)
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[rank - 1]


def predict_with_uncertainty(model: ForecastModel, x: FeatureVector, residual_pool: Sequence[float],
                             q_low: float = 0.1, q_high: float = 0.9) -> Prediction:
    if not residual_pool:
        raise EmptyResidualPool("residual pool is empty")
    if not 0 <= q_low < q_high <= 1:
        raise ValueError("need 0 <= q_low < q_high <= 1")
    value = model.predict_one(x.as_array())
    lower = min(value + empirical_quantile(residual_pool, q_low), value)
    upper = max(value + empirical_quantile(residual_pool, q_high), value)
    # demand is non-negative
    lower = max(lower, 0.0)
    value = max(value, lower)
    upper = max(upper, value)
    return Prediction(x.material, x.target_month, value, lower, upper, list(residual_pool))
