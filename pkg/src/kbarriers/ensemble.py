"""Least-squares boosted regression stumps with split-gain importance.

Each round fits one exact-search stump to the current residuals (unit sample
weights). Importance per feature is the accumulated node-risk reduction of
its splits, normalized by the ensemble's branch-node count and rescaled so
the largest feature scores 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Stump:
    feature: int
    threshold: float  # x[feature] < threshold goes left
    left_value: float
    right_value: float
    delta_risk: float  # parent risk minus summed child risks

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.where(x[:, self.feature] < self.threshold, self.left_value, self.right_value)


@dataclass(frozen=True)
class StumpEnsemble:
    base_value: float
    learning_rate: float
    stumps: tuple[Stump, ...]
    n_features: int

    def predict(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.full(x.shape[0], self.base_value)
        for stump in self.stumps:
            out += self.learning_rate * stump.predict(x)
        return out

    def staged_train_sse(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Training SSE after the base value and after each boosting round."""
        x = np.asarray(x, dtype=np.float64)
        residual = np.asarray(y, dtype=np.float64) - self.base_value
        sse = [float(np.sum(residual**2))]
        for stump in self.stumps:
            residual = residual - self.learning_rate * stump.predict(x)
            sse.append(float(np.sum(residual**2)))
        return np.array(sse)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("round,feature,threshold,left_value,right_value,delta_risk\n")
            for i, s in enumerate(self.stumps):
                fh.write(
                    f"{i},{s.feature},{s.threshold!r},{s.left_value!r},"
                    f"{s.right_value!r},{s.delta_risk!r}\n"
                )


def node_risk(values: np.ndarray, total_count: int) -> float:
    """Node probability times node mean squared error."""
    values = np.asarray(values, dtype=np.float64)
    if total_count < 1:
        raise ValidationError("total_count must be >= 1")
    if values.size == 0:
        return 0.0
    p = values.size / total_count
    return float(p * np.mean((values - values.mean()) ** 2))


def _best_split(x: np.ndarray, residual: np.ndarray):
    """Exact least-squares stump over midpoint thresholds of every feature.

    Returns (feature, threshold, left_mean, right_mean) or None when no
    feature has two distinct values. Ties keep the lowest feature index and
    then the lowest threshold (strict improvement required to switch).
    """
    n, n_features = x.shape
    best = None
    best_sse = np.inf
    for f in range(n_features):
        order = np.argsort(x[:, f], kind="stable")
        xs = x[order, f]
        rs = residual[order]
        distinct = np.nonzero(xs[1:] > xs[:-1])[0] + 1
        if distinct.size == 0:
            continue
        csum = np.concatenate(([0.0], np.cumsum(rs)))
        csq = np.concatenate(([0.0], np.cumsum(rs**2)))
        total_sum, total_sq = csum[-1], csq[-1]
        k = distinct.astype(np.float64)
        left_sse = csq[distinct] - csum[distinct] ** 2 / k
        right_sse = (total_sq - csq[distinct]) - (total_sum - csum[distinct]) ** 2 / (n - k)
        sse = left_sse + right_sse
        idx = int(np.argmin(sse))
        if sse[idx] < best_sse:
            best_sse = float(sse[idx])
            pos = distinct[idx]
            threshold = float((xs[pos - 1] + xs[pos]) / 2.0)
            best = (
                f,
                threshold,
                float(csum[pos] / pos),
                float((total_sum - csum[pos]) / (n - pos)),
            )
    return best


def fit_lsboost(
    x: np.ndarray,
    y: np.ndarray,
    n_rounds: int = 100,
    learning_rate: float = 1.0,
) -> StumpEnsemble:
    """Boost stumps on residuals starting from the label mean."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise ValidationError(f"bad shapes x={x.shape} y={y.shape}")
    if x.shape[0] < 1:
        raise ValidationError("need at least one sample")
    if n_rounds < 1:
        raise ValidationError("n_rounds must be >= 1")
    if not (0.0 < learning_rate <= 1.0):
        raise ValidationError("learning_rate must be in (0, 1]")

    n = x.shape[0]
    base = float(y.mean())
    residual = y - base
    stumps = []
    for _ in range(n_rounds):
        split = _best_split(x, residual)
        if split is None:
            # No feature separates the rows; constant stump, no risk change.
            stump = Stump(0, float(x[0, 0]), float(residual.mean()), float(residual.mean()), 0.0)
        else:
            f, threshold, left_mean, right_mean = split
            left = x[:, f] < threshold
            parent = node_risk(residual, n)
            children = node_risk(residual[left], n) + node_risk(residual[~left], n)
            stump = Stump(f, threshold, left_mean, right_mean, parent - children)
        residual = residual - learning_rate * stump.predict(x)
        stumps.append(stump)
    return StumpEnsemble(
        base_value=base,
        learning_rate=learning_rate,
        stumps=tuple(stumps),
        n_features=x.shape[1],
    )


def feature_importance(ensemble: StumpEnsemble) -> np.ndarray:
    """Accumulated risk reduction per feature, rescaled to a max of 1."""
    raw = np.zeros(ensemble.n_features)
    for stump in ensemble.stumps:
        raw[stump.feature] += stump.delta_risk
    raw /= len(ensemble.stumps)
    top = raw.max()
    return raw / top if top > 0 else raw
