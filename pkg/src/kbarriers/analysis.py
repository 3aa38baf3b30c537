"""Fit diagnostics: correlation metrics, error histograms, partial dependence."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class MetricsReport:
    r: float  # Pearson correlation
    rmse: float
    bias: float  # mean(predicted - observed); positive means overestimation
    n: int

    def to_dict(self) -> dict:
        return {"r": self.r, "rmse": self.rmse, "bias": self.bias, "n": self.n}


def metrics(observed, predicted) -> MetricsReport:
    obs = np.asarray(observed, dtype=np.float64)
    pred = np.asarray(predicted, dtype=np.float64)
    if obs.shape != pred.shape or obs.ndim != 1:
        raise ValidationError(f"bad shapes observed={obs.shape} predicted={pred.shape}")
    if obs.size < 2:
        raise ValidationError("need at least two points")
    do = obs - obs.mean()
    dp = pred - pred.mean()
    denom = np.sqrt((do**2).sum() * (dp**2).sum())
    if denom == 0.0:
        raise ValidationError("correlation undefined for zero-variance inputs")
    return MetricsReport(
        r=float((do * dp).sum() / denom),
        rmse=float(np.sqrt(np.mean((pred - obs) ** 2))),
        bias=float(np.mean(pred - obs)),
        n=int(obs.size),
    )


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray  # len(counts) + 1
    counts: np.ndarray
    degenerate: bool = False  # all errors identical, single collapsed bin

    def total(self) -> int:
        return int(self.counts.sum())


def error_histogram(observed, predicted, bins: int = 20) -> Histogram:
    """Histogram of observed - predicted over equal-width bins.

    Mass left of zero is overestimation. Identical errors collapse to a
    single zero-width bin instead of erroring.
    """
    obs = np.asarray(observed, dtype=np.float64)
    pred = np.asarray(predicted, dtype=np.float64)
    if obs.shape != pred.shape or obs.ndim != 1 or obs.size == 0:
        raise ValidationError(f"bad shapes observed={obs.shape} predicted={pred.shape}")
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    errors = obs - pred
    lo, hi = float(errors.min()), float(errors.max())
    if lo == hi:
        return Histogram(
            edges=np.array([lo, hi]),
            counts=np.array([errors.size]),
            degenerate=True,
        )
    counts, edges = np.histogram(errors, bins=bins, range=(lo, hi))
    return Histogram(edges=edges, counts=counts)


@dataclass(frozen=True)
class PdpSurface:
    feature_x: int
    feature_y: int
    grid_x: np.ndarray
    grid_y: np.ndarray
    values: np.ndarray  # (len(grid_x), len(grid_y))
    degenerate_x: bool = False
    degenerate_y: bool = False

    def mean_slope_x(self) -> float:
        """Mean finite difference along the x feature, averaged over y."""
        if len(self.grid_x) < 2:
            raise ValidationError("x axis is degenerate; slope undefined")
        steps = np.diff(self.grid_x)[:, None]
        return float(np.mean(np.diff(self.values, axis=0) / steps))

    def mean_slope_y(self) -> float:
        if len(self.grid_y) < 2:
            raise ValidationError("y axis is degenerate; slope undefined")
        steps = np.diff(self.grid_y)[None, :]
        return float(np.mean(np.diff(self.values, axis=1) / steps))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y,value\n")
            for i, gx in enumerate(self.grid_x):
                for j, gy in enumerate(self.grid_y):
                    fh.write(f"{gx!r},{gy!r},{self.values[i, j]!r}\n")


def pdp_surface(predictor, x: np.ndarray, pair: tuple[int, int], grid_n: int = 20) -> PdpSurface:
    """Two-feature partial dependence by empirical marginalization.

    Every grid cell overwrites the pair's columns across all observed rows
    and averages the predictions; the remaining features keep their joint
    empirical distribution. A constant feature yields a single-point axis,
    flagged degenerate.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError(f"bad design matrix shape {x.shape}")
    fi, fj = pair
    if not (0 <= fi < x.shape[1]) or not (0 <= fj < x.shape[1]) or fi == fj:
        raise ValidationError(f"bad feature pair {pair}")
    if grid_n < 2:
        raise ValidationError("grid_n must be >= 2")

    def axis(f):
        lo, hi = float(x[:, f].min()), float(x[:, f].max())
        if lo == hi:
            return np.array([lo]), True
        return np.linspace(lo, hi, grid_n), False

    grid_x, degen_x = axis(fi)
    grid_y, degen_y = axis(fj)

    n = x.shape[0]
    ga, gb = np.meshgrid(grid_x, grid_y, indexing="ij")
    cells = ga.size
    batch = np.repeat(x, cells, axis=0).reshape(n, cells, x.shape[1])
    batch[:, :, fi] = ga.ravel()[None, :]
    batch[:, :, fj] = gb.ravel()[None, :]
    preds = np.asarray(predictor(batch.reshape(n * cells, x.shape[1])))
    values = preds.reshape(n, cells).mean(axis=0).reshape(ga.shape)
    return PdpSurface(
        feature_x=fi,
        feature_y=fj,
        grid_x=grid_x,
        grid_y=grid_y,
        values=values,
        degenerate_x=degen_x,
        degenerate_y=degen_y,
    )


def pdp_mean_slopes(surfaces) -> dict[int, float]:
    """Average per-feature PDP slope across every surface touching it."""
    acc: dict[int, list[float]] = {}
    for s in surfaces:
        if not s.degenerate_x:
            acc.setdefault(s.feature_x, []).append(s.mean_slope_x())
        if not s.degenerate_y:
            acc.setdefault(s.feature_y, []).append(s.mean_slope_y())
    return {f: float(np.mean(v)) for f, v in acc.items()}
