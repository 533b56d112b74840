"""Independent reference implementations used to check the package."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def wls_normal_equations(X, y, w, ridge=0.0):
    """Weighted ridge regression via an augmented least-squares system.

    Intercept column is unpenalized. Returns (coef, intercept).
    """
    X = np.asarray(X, float)
    n, d = X.shape
    sw = np.sqrt(np.asarray(w, float))
    design = np.column_stack([np.ones(n), X]) * sw[:, None]
    target = np.asarray(y, float) * sw
    if ridge > 0:
        penalty = np.hstack([np.zeros((d, 1)), np.sqrt(ridge) * np.eye(d)])
        design = np.vstack([design, penalty])
        target = np.concatenate([target, np.zeros(d)])
    beta, *_ = np.linalg.lstsq(design, target, rcond=None)
    return beta[1:], float(beta[0])


def transport_by_vertices(a, b, cost):
    """Minimum of the transportation LP by enumerating every basic solution."""
    a, b, cost = np.asarray(a, float), np.asarray(b, float), np.asarray(cost, float)
    m, n = len(a), len(b)
    rows = []
    for i in range(m):
        r = np.zeros(m * n)
        r[i * n:(i + 1) * n] = 1
        rows.append(r)
    for j in range(n - 1):  # the last column constraint is implied by the others
        r = np.zeros(m * n)
        r[j::n] = 1
        rows.append(r)
    A = np.array(rows)
    rhs = np.concatenate([a, b[:-1]])
    k = m + n - 1
    subsets = np.array(list(itertools.combinations(range(m * n), k)))
    blocks = np.transpose(A[:, subsets], (1, 0, 2))  # (S, k, k)
    dets = np.linalg.det(blocks)
    ok = np.abs(dets) > 1e-9
    sols = np.linalg.solve(blocks[ok], np.broadcast_to(rhs, (ok.sum(), k))[..., None])[..., 0]
    feasible = np.all(sols >= -1e-12, axis=1)
    flat = cost.ravel()
    costs = np.sum(sols[feasible] * flat[subsets[ok][feasible]], axis=1)
    return float(costs.min())


def precision_at_k(flags, k):
    head = flags[:k]
    if not head:
        return None
    return Fraction(sum(1 for f in head if f), len(head))


def metrics_by_hand(records):
    """Every metric from (explanation_id, kind, rank, item_id, relevant) tuples, in exact arithmetic."""
    out = {}
    for kind, label in (("event", "events"), ("keyword", "keywords")):
        per = {}
        for eid, k, rank, item, rel in records:
            if k == kind:
                per.setdefault(eid, []).append((rank, item, rel))
        lists = [sorted(v) for _, v in sorted(per.items())]
        for K in (1, 3):
            ps = [precision_at_k([r for _, _, r in lst], K) for lst in lists]
            ps = [p for p in ps if p is not None]
            out[f"{label}_avg_precision_at_{K}"] = float(sum(ps, Fraction(0)) / len(ps))
            listed = [item for lst in lists for _, item, _ in lst[:K]]
            out[f"{label}_rde_at_{K}"] = float(Fraction(len(set(listed)), len(listed)))
    ds = [(item, rel) for _, k, _, item, rel in records if k == "dataset"]
    out["datasets_accuracy"] = float(Fraction(sum(1 for _, r in ds if r), len(ds)))
    out["datasets_rde"] = float(Fraction(len({i for i, _ in ds}), len(ds)))
    return out
