"""Time-ordered nested cross-validation.

Each outer fold holds out one month ``t`` and trains on every earlier month.
Inside it, candidates are compared by one-step-ahead absolute error on the
last ``inner_months`` months of that training window, again training only on
months preceding each validation month.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .svr import ForecastModel, SVRSchedule, train_svr


class InsufficientHistory(ValueError):
    pass


@dataclass
class OuterFold:
    test_month: object
    train_months: list
    params: dict
    prediction: float
    actual: float
    model: ForecastModel

    @property
    def abs_error(self) -> float:
        return abs(self.actual - self.prediction)

    @property
    def residual(self) -> float:
        return self.actual - self.prediction


@dataclass
class NestedCVResult:
    folds: list[OuterFold] = field(default_factory=list)

    def scores(self) -> dict:
        return {f.test_month: f.abs_error for f in self.folds}

    def selected(self) -> dict:
        return {f.test_month: f.params for f in self.folds}

    def fold_for(self, month) -> OuterFold:
        for f in self.folds:
            if f.test_month == month:
                return f
        raise KeyError(month)

    def residuals_before(self, month) -> list[float]:
        return [f.residual for f in self.folds if f.test_month < month]


def _fit(X, y, params, schedule, feature_ids):
    return train_svr(X, y, C=params["C"], epsilon=params["epsilon"],
                     schedule=schedule, feature_ids=feature_ids)


def inner_score(X, y, params: Mapping, inner_months: int, schedule: SVRSchedule) -> float:
    n = len(y)
    errors = []
    for v in range(n - inner_months, n):
        model = _fit(X[:v], y[:v], params, schedule, None)
        errors.append(abs(y[v] - model.predict_one(X[v])))
    return float(np.mean(errors))


def select_params(X, y, grid: Sequence[Mapping], inner_months: int, schedule: SVRSchedule) -> dict:
    if len(grid) == 1:
        return dict(grid[0])
    scores = [inner_score(X, y, p, inner_months, schedule) for p in grid]
    return dict(grid[int(np.argmin(scores))])  # first candidate wins ties


def nested_cv(months: Sequence, X, y, grid: Sequence[Mapping], outer_months: int,
              min_train: int = 6, inner_months: int = 2,
              schedule: Optional[SVRSchedule] = None,
              feature_ids: Optional[Sequence[str]] = None) -> NestedCVResult:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    months = list(months)
    if any(b <= a for a, b in zip(months, months[1:])):
        raise ValueError("dataset months must be strictly increasing")
    if not grid:
        raise ValueError("empty hyperparameter grid")
    if min_train < inner_months + 2:
        raise ValueError("min_train must leave at least 2 rows for every inner fold")
    n = len(months)
    if outer_months < 1 or outer_months > n - min_train:
        raise InsufficientHistory(
            f"{outer_months} outer months requested, only {n - min_train} available "
            f"with minimum training size {min_train}"
        )
    schedule = schedule or SVRSchedule()
    result = NestedCVResult()
    for i in range(n - outer_months, n):
        Xtr, ytr = X[:i], y[:i]
        params = select_params(Xtr, ytr, grid, inner_months, schedule)
        model = _fit(Xtr, ytr, params, schedule, feature_ids)
        result.folds.append(OuterFold(
            test_month=months[i],
            train_months=months[:i],
            params=params,
            prediction=model.predict_one(X[i]),
            actual=float(y[i]),
            model=model,
        ))
    return result
