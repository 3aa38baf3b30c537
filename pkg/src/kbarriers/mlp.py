"""Small feedforward surrogate trained with Levenberg-Marquardt.

Architecture is 4 inputs, tansig hidden layers (20/20 by default), one
linear output. Inputs and targets are affinely mapped to [-1, 1] using the
train split's ranges; the damped Gauss-Newton update runs on that normalized
scale with the exact output Jacobian assembled by backpropagation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import TrainingFailureError, ValidationError
from .seeds import derive_seed

MODEL_FORMAT_VERSION = 1


def tansig(x):
    """Hyperbolic tangent transfer function."""
    return np.tanh(x)


@dataclass(frozen=True)
class AffineMap:
    """Per-dimension map x -> (x - mid) * scale onto [-1, 1]."""

    mid: np.ndarray
    scale: np.ndarray

    def apply(self, x: np.ndarray) -> np.ndarray:
        return (x - self.mid) * self.scale

    def invert(self, z: np.ndarray) -> np.ndarray:
        return z / self.scale + self.mid


def _fit_map(values: np.ndarray, degenerate_scale: float) -> AffineMap:
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    scale = np.where(span > 0.0, 2.0 / np.where(span > 0.0, span, 1.0), degenerate_scale)
    return AffineMap(mid=(lo + hi) / 2.0, scale=scale)


@dataclass
class MlpModel:
    layer_sizes: list[int]
    weights: list[np.ndarray]  # (n_out, n_in) per layer
    biases: list[np.ndarray]  # (n_out,) per layer
    input_map: AffineMap
    output_map: AffineMap

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


def init_model(
    layer_sizes, seed: int, input_map: AffineMap | None = None, output_map: AffineMap | None = None
) -> MlpModel:
    """Seeded uniform init in [-0.5, 0.5] scaled by 1/sqrt(fan_in)."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValidationError(f"bad layer sizes {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        bound = 0.5 / np.sqrt(n_in)
        weights.append(rng.uniform(-bound, bound, size=(n_out, n_in)))
        biases.append(rng.uniform(-bound, bound, size=n_out))
    if input_map is None:
        input_map = AffineMap(mid=np.zeros(sizes[0]), scale=np.ones(sizes[0]))
    if output_map is None:
        output_map = AffineMap(mid=np.zeros(1), scale=np.ones(1))
    return MlpModel(sizes, weights, biases, input_map, output_map)


def _forward_norm(model: MlpModel, xn: np.ndarray):
    """Normalized-scale forward pass; returns output and all activations."""
    activations = [xn]
    a = xn
    last = len(model.weights) - 1
    for idx, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = a @ w.T + b
        a = z if idx == last else tansig(z)
        activations.append(a)
    return a[:, 0], activations


def predict(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Batch prediction in original units; x is (m, n_in)."""
    x = np.asarray(x, dtype=np.float64)
    yn, _ = _forward_norm(model, model.input_map.apply(x))
    return model.output_map.invert(yn)


def forward(model: MlpModel, features) -> float:
    """Single prediction from one feature vector."""
    x = np.asarray(features, dtype=np.float64).reshape(1, -1)
    if x.shape[1] != model.layer_sizes[0]:
        raise ValidationError(
            f"expected {model.layer_sizes[0]} features, got {x.shape[1]}"
        )
    return float(predict(model, x)[0])


def pack_params(model: MlpModel) -> np.ndarray:
    parts = []
    for w, b in zip(model.weights, model.biases):
        parts.append(w.ravel())
        parts.append(b)
    return np.concatenate(parts)


def unpack_params(model: MlpModel, params: np.ndarray) -> None:
    """Write a flat parameter vector back into the model in place."""
    pos = 0
    for w, b in zip(model.weights, model.biases):
        w[...] = params[pos : pos + w.size].reshape(w.shape)
        pos += w.size
        b[...] = params[pos : pos + b.size]
        pos += b.size


def jacobian_norm(model: MlpModel, xn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Output Jacobian d f_norm / d params for each normalized sample.

    Returns (J, y_norm) with J of shape (n_samples, n_params); column order
    matches pack_params (layer weights row-major, then layer biases).
    """
    yn, activations = _forward_norm(model, xn)
    n = xn.shape[0]
    deltas = [None] * len(model.weights)
    deltas[-1] = np.ones((n, 1))
    for l in range(len(model.weights) - 2, -1, -1):
        back = deltas[l + 1] @ model.weights[l + 1]
        deltas[l] = back * (1.0 - activations[l + 1] ** 2)
    blocks = []
    for l, (w, _) in enumerate(zip(model.weights, model.biases)):
        outer = np.einsum("no,ni->noi", deltas[l], activations[l])
        blocks.append(outer.reshape(n, w.size))
        blocks.append(deltas[l])
    return np.concatenate(blocks, axis=1), yn


def lm_step(j: np.ndarray, e: np.ndarray, mu: float) -> np.ndarray:
    """Solve (J'J + mu I) dw = J'e for the damped Gauss-Newton step."""
    a = j.T @ j
    a[np.diag_indices_from(a)] += mu
    return np.linalg.solve(a, j.T @ e)


@dataclass(frozen=True)
class TrainConfig:
    hidden_layers: tuple[int, ...] = (20, 20)
    mu_init: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_max: float = 1e10
    max_epochs: int = 1000
    max_val_failures: int = 6
    min_grad: float = 1e-7  # stop when max |J'e| falls below this
    restarts: int = 10
    init_seed: int = 0

    def __post_init__(self):
        if len(self.hidden_layers) == 0:
            raise ValidationError("hidden_layers must name at least one layer")
        if any(h < 1 for h in self.hidden_layers):
            raise ValidationError(f"bad hidden layer sizes {self.hidden_layers}")
        if self.restarts < 1 or self.max_epochs < 1:
            raise ValidationError("restarts and max_epochs must be >= 1")


@dataclass
class TrainReport:
    stop_reason: str  # val_failures | max_epochs | min_gradient | mu_cap
    epochs_run: int
    final_mu: float
    train_curve: list[float]  # normalized-scale MSE per epoch
    val_curve: list[float]
    best_val: float
    best_restart: int
    restart_val_losses: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mse(model: MlpModel, params: np.ndarray, xn: np.ndarray, yn: np.ndarray) -> float:
    unpack_params(model, params)
    out, _ = _forward_norm(model, xn)
    return float(np.mean((yn - out) ** 2))


def _train_once(layer_sizes, seed, xn_train, yn_train, xn_val, yn_val, cfg: TrainConfig):
    model = init_model(layer_sizes, seed)
    params = pack_params(model)
    mu = cfg.mu_init
    train_curve: list[float] = []
    val_curve: list[float] = []
    best_val = np.inf
    best_params = params.copy()
    fail_streak = 0
    stop_reason = "max_epochs"
    epoch = 0

    train_mse = _mse(model, params, xn_train, yn_train)
    while epoch < cfg.max_epochs:
        unpack_params(model, params)
        j, out = jacobian_norm(model, xn_train)
        e = yn_train - out
        grad = j.T @ e
        if float(np.abs(grad).max()) < cfg.min_grad:
            stop_reason = "min_gradient"
            break

        jtj = j.T @ j
        identity = np.eye(jtj.shape[0])
        accepted = False
        solvable = False
        while mu <= cfg.mu_max:
            try:
                step = np.linalg.solve(jtj + mu * identity, grad)
            except np.linalg.LinAlgError:
                mu *= cfg.mu_inc
                continue
            if not np.all(np.isfinite(step)):
                mu *= cfg.mu_inc
                continue
            solvable = True
            candidate = params + step
            cand_mse = _mse(model, candidate, xn_train, yn_train)
            if np.isfinite(cand_mse) and cand_mse < train_mse:
                params = candidate
                train_mse = cand_mse
                mu = max(mu * cfg.mu_dec, 1e-20)
                accepted = True
                break
            mu *= cfg.mu_inc
        if not accepted:
            if not solvable:
                raise TrainingFailureError(
                    f"system stayed singular up to the damping cap mu={cfg.mu_max:g}"
                )
            stop_reason = "mu_cap"
            break

        epoch += 1
        val_mse = _mse(model, params, xn_val, yn_val)
        train_curve.append(train_mse)
        val_curve.append(val_mse)
        if val_mse < best_val:
            best_val = val_mse
            best_params = params.copy()
            fail_streak = 0
        else:
            fail_streak += 1
            if fail_streak >= cfg.max_val_failures:
                stop_reason = "val_failures"
                break

    if not np.isfinite(best_val):
        # No epoch ever completed; keep the initial weights.
        best_params = params
        best_val = _mse(model, params, xn_val, yn_val)
    unpack_params(model, best_params)
    report = TrainReport(
        stop_reason=stop_reason,
        epochs_run=epoch,
        final_mu=mu,
        train_curve=train_curve,
        val_curve=val_curve,
        best_val=best_val,
        best_restart=0,
    )
    return model, report


def train_lm(dataset: Dataset, config: TrainConfig) -> tuple[MlpModel, TrainReport]:
    """Train on the dataset's train split with damped Gauss-Newton steps.

    Runs config.restarts seeded initializations and returns the model with
    the lowest validation MSE, with weights restored from its best
    validation epoch.
    """
    if dataset.split is None:
        raise ValidationError("dataset must be split before training")
    x = dataset.features()
    y = dataset.labels().reshape(-1, 1)
    idx_train = dataset.indices("train")
    idx_val = dataset.indices("val")

    input_map = _fit_map(x[idx_train], degenerate_scale=0.0)
    output_map = _fit_map(y[idx_train], degenerate_scale=1.0)
    xn = input_map.apply(x)
    yn = output_map.apply(y)[:, 0]

    layer_sizes = [x.shape[1], *config.hidden_layers, 1]
    best = None
    restart_losses = []
    for r in range(config.restarts):
        seed = derive_seed(config.init_seed, r)
        model, report = _train_once(
            layer_sizes,
            seed,
            xn[idx_train],
            yn[idx_train],
            xn[idx_val],
            yn[idx_val],
            config,
        )
        restart_losses.append(report.best_val)
        if best is None or report.best_val < best[1].best_val:
            report.best_restart = r
            best = (model, report)

    model, report = best
    report.restart_val_losses = restart_losses
    model.input_map = input_map
    model.output_map = output_map
    return model, report


def model_to_dict(model: MlpModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "layer_sizes": list(model.layer_sizes),
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "input_map": {
            "mid": model.input_map.mid.tolist(),
            "scale": model.input_map.scale.tolist(),
        },
        "output_map": {
            "mid": model.output_map.mid.tolist(),
            "scale": model.output_map.scale.tolist(),
        },
    }


def model_from_dict(payload: dict) -> MlpModel:
    version = payload.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ValidationError(f"unsupported model format version {version!r}")
    sizes = [int(s) for s in payload["layer_sizes"]]
    weights = [np.asarray(w, dtype=np.float64) for w in payload["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in payload["biases"]]
    for (n_in, n_out), w, b in zip(zip(sizes[:-1], sizes[1:]), weights, biases):
        if w.shape != (n_out, n_in) or b.shape != (n_out,):
            raise ValidationError("model weights do not match layer sizes")
    return MlpModel(
        layer_sizes=sizes,
        weights=weights,
        biases=biases,
        input_map=AffineMap(
            mid=np.asarray(payload["input_map"]["mid"], dtype=np.float64),
            scale=np.asarray(payload["input_map"]["scale"], dtype=np.float64),
        ),
        output_map=AffineMap(
            mid=np.asarray(payload["output_map"]["mid"], dtype=np.float64),
            scale=np.asarray(payload["output_map"]["scale"], dtype=np.float64),
        ),
    )


def save_model(model: MlpModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)


def load_model(path) -> MlpModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
