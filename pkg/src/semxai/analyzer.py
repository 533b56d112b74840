"""Local surrogate explanations for single black-box predictions.

Perturbations are drawn in standardized feature space around the instance,
weighted by an exponential kernel on Euclidean distance, and explained by a
ridge-damped weighted least-squares fit restricted to the ``top_k`` features
with the largest full-fit coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np


class NonFiniteInstance(ValueError):
    pass


class SingularSystem(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class AnalyzerConfig:
    n_samples: int = 1000
    kernel_width: Optional[float] = None  # default 0.75 * sqrt(feature count)
    top_k_features: int = 4
    seed: int = 0
    ridge: float = 1e-6

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError("n_samples must be >= 10")
        if self.kernel_width is not None and self.kernel_width <= 0:
            raise ValueError("kernel_width must be positive")
        if self.top_k_features < 1:
            raise ValueError("top_k_features must be positive")

    def width_for(self, n_features: int) -> float:
        return self.kernel_width if self.kernel_width is not None else 0.75 * math.sqrt(n_features)


@dataclass
class SurrogateExplanation:
    instance: np.ndarray
    feature_ids: list[str]
    coefficients: dict[str, float]
    intercept: float
    fidelity: float
    ranking: list[str] = field(default_factory=list)


def sample_perturbations(x, n: int, scale, seed: int) -> np.ndarray:
    """``n`` Gaussian perturbations of ``x``; row 0 is ``x`` itself."""
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInstance("instance contains non-finite values")
    scale = np.broadcast_to(np.asarray(scale, dtype=float), x.shape)
    if not (np.all(np.isfinite(scale)) and np.all(scale > 0)):
        raise ValueError("perturbation scale must be finite and positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, x.shape[0])) * scale
    noise[0] = 0.0
    return x + noise


def kernel_weights(samples, x, width: float) -> np.ndarray:
    d2 = np.sum((np.asarray(samples) - np.asarray(x)) ** 2, axis=1)
    return np.exp(-d2 / width**2)


def weighted_least_squares(X, y, w, ridge: float = 1e-6) -> tuple[np.ndarray, float]:
    """Ridge-damped WLS with an unpenalized intercept."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    total = w.sum()
    x_bar = w @ X / total
    y_bar = float(w @ y / total)
    Xc = X - x_bar
    yc = y - y_bar
    A = Xc.T @ (Xc * w[:, None]) + ridge * np.eye(X.shape[1])
    rhs = Xc.T @ (w * yc)
    try:
        coef = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"surrogate normal equations are singular (ridge={ridge})") from exc
    return coef, y_bar - float(x_bar @ coef)


def weighted_r2(y, y_hat, w) -> float:
    y = np.asarray(y, dtype=float)
    w = np.asarray(w, dtype=float)
    y_bar = w @ y / w.sum()
    ss_res = float(w @ (y - y_hat) ** 2)
    ss_tot = float(w @ (y - y_bar) ** 2)
    if ss_tot == 0:
        return 1.0 if ss_res == 0 else -math.inf
    return 1.0 - ss_res / ss_tot


def rank_features(coefficients: Mapping[str, float] | SurrogateExplanation) -> list[tuple[str, float]]:
    """Features by descending |coefficient|, ties broken by feature id."""
    if isinstance(coefficients, SurrogateExplanation):
        coefficients = coefficients.coefficients
    return sorted(coefficients.items(), key=lambda kv: (-abs(kv[1]), kv[0]))


def fit_surrogate(samples, outputs, x, width: float, top_k: int,
                  feature_ids: Optional[Sequence[str]] = None,
                  ridge: float = 1e-6) -> SurrogateExplanation:
    samples = np.asarray(samples, dtype=float)
    outputs = np.asarray(outputs, dtype=float)
    if not np.all(np.isfinite(outputs)):
        raise ValueError("black-box outputs must be finite")
    if width <= 0:
        raise ValueError("kernel width must be positive")
    d = samples.shape[1]
    ids = list(feature_ids) if feature_ids is not None else [f"x{i}" for i in range(d)]
    top_k = min(top_k, d)

    w = kernel_weights(samples, x, width)
    full, _ = weighted_least_squares(samples, outputs, w, ridge)
    full_rank = rank_features(dict(zip(ids, full)))
    selected = sorted(ids.index(fid) for fid, _ in full_rank[:top_k])

    coef, intercept = weighted_least_squares(samples[:, selected], outputs, w, ridge)
    fitted = samples[:, selected] @ coef + intercept
    coefficients = {fid: 0.0 for fid in ids}
    for j, c in zip(selected, coef):
        coefficients[ids[j]] = float(c)
    chosen = {ids[j] for j in selected}
    ranking = [fid for fid, _ in rank_features(coefficients) if fid in chosen]
    return SurrogateExplanation(
        instance=np.asarray(x, dtype=float),
        feature_ids=ids,
        coefficients=coefficients,
        intercept=float(intercept),
        fidelity=weighted_r2(outputs, fitted, w),
        ranking=ranking,
    )


def explain_instance(predict: Callable[[np.ndarray], np.ndarray], x_raw, feature_mean, feature_scale,
                     config: AnalyzerConfig, feature_ids: Sequence[str]) -> SurrogateExplanation:
    """Explain ``predict`` at raw instance ``x_raw``.

    Perturbation happens in the space standardized by ``feature_mean`` and
    ``feature_scale``; coefficients are per standard deviation of each feature.
    """
    mean = np.asarray(feature_mean, dtype=float)
    scale = np.asarray(feature_scale, dtype=float)
    z = (np.asarray(x_raw, dtype=float) - mean) / scale
    samples = sample_perturbations(z, config.n_samples, 1.0, config.seed)
    outputs = np.asarray(predict(mean + samples * scale), dtype=float)
    return fit_surrogate(samples, outputs, z, config.width_for(len(z)),
                         config.top_k_features, feature_ids, config.ridge)
