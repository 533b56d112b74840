"""Linear epsilon-insensitive support vector regression.

Minimizes ``0.5 * ||w||^2 + C * sum(max(0, |y_i - w.x_i - b| - epsilon))`` by
full-batch subgradient descent with a ``eta0 / sqrt(t)`` step and suffix
averaging of the iterates. Features and targets are standardized internally;
rescaling the targets by ``s`` is equivalent to using ``C / s`` on the scaled
problem, so the optimum is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class SVRSchedule:
    n_iter: int = 3000
    eta0: float = 0.5
    average_from: float = 0.5  # fraction of iterations after which iterates are averaged


@dataclass
class ForecastModel:
    weights: np.ndarray
    bias: float
    C: float
    epsilon: float
    schedule: SVRSchedule
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    feature_ids: list[str] = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return X @ self.weights + self.bias

    def predict_one(self, x) -> float:
        return float(self.predict(np.asarray(x, dtype=float)[None, :])[0])


def epsilon_loss(residuals, epsilon: float) -> float:
    return float(np.maximum(np.abs(residuals) - epsilon, 0.0).sum())


def _objective(w, b, X, y, C, epsilon):
    return 0.5 * float(w @ w) + C * epsilon_loss(y - X @ w - b, epsilon)


def train_svr(X, y, C: float = 1.0, epsilon: float = 0.1,
              schedule: Optional[SVRSchedule] = None,
              feature_ids: Optional[Sequence[str]] = None) -> ForecastModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DegenerateInput("need at least 2 training rows")
    if y.shape != (X.shape[0],):
        raise DegenerateInput("X and y row counts differ")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise DegenerateInput("training data contains non-finite values")
    if C <= 0 or epsilon < 0:
        raise ValueError("need C > 0 and epsilon >= 0")
    schedule = schedule or SVRSchedule()
    n, d = X.shape

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    y_scale = float(y.std()) or 1.0
    y_center = float(np.median(y))
    t = (y - y_center) / y_scale
    eps = epsilon / y_scale
    reg = 1.0 / ((C / y_scale) * n)

    w = np.zeros(d)
    b = 0.0
    avg_w = np.zeros(d)
    avg_b = 0.0
    n_avg = 0
    start = int(schedule.n_iter * schedule.average_from)
    for it in range(schedule.n_iter):
        r = t - Z @ w - b
        s = np.where(r > eps, 1.0, 0.0) - np.where(r < -eps, 1.0, 0.0)
        w = w - schedule.eta0 / np.sqrt(it + 1.0) * (reg * w - Z.T @ s / n)
        b = b + schedule.eta0 / np.sqrt(it + 1.0) * s.sum() / n
        if it >= start:
            n_avg += 1
            avg_w += (w - avg_w) / n_avg
            avg_b += (b - avg_b) / n_avg

    candidates = []
    for cw, cb in ((avg_w, avg_b), (w, b)):
        raw_w = cw / scale * y_scale
        raw_b = y_center + cb * y_scale - float(raw_w @ mean)
        candidates.append((raw_w, raw_b))
    candidates.append((np.zeros(d), 0.0))
    # Keep whichever has the lowest primal objective; including the zero model
    # guarantees the trained loss never exceeds the zero model's.
    best_w, best_b = min(candidates, key=lambda wb: _objective(wb[0], wb[1], X, y, C, epsilon))
    return ForecastModel(
        weights=best_w,
        bias=float(best_b),
        C=C,
        epsilon=epsilon,
        schedule=schedule,
        feature_mean=mean,
        feature_scale=scale,
        feature_ids=list(feature_ids) if feature_ids is not None else [f"x{i}" for i in range(d)],
    )
