"""Command line front end.

Subcommands cover the full workflow: simulate sweeps, train the surrogate,
explain a fitted model, benchmark simulation against the surrogate, and
predict from a saved model. Every run writes a manifest (config snapshot,
seeds, version) so outputs can be reproduced exactly.
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_histogram, metrics, pdp_surface
from .coverage import build_coverage_graph, count_barriers
from .dataset import (
    FEATURE_NAMES,
    Dataset,
    SweepConfig,
    canonical_sweep_config,
    ingest_csv,
    run_sweep,
    split_dataset,
)
from .deployment import DISTRIBUTIONS, DeploymentSpec, RegionSpec, deploy
from .ensemble import feature_importance, fit_lsboost
from .errors import ConfigError, KBarriersError
from .mlp import TrainConfig, forward, init_model, load_model, predict, save_model, train_lm
from .seeds import derive_seed

OUTPUT_DIR_ENV = "KBARRIERS_OUTPUT_DIR"


@dataclass(frozen=True)
class ExperimentConfig:
    """Every tunable with its default; JSON config keys match field names."""

    master_seed: int = 42
    output_dir: str = "runs"
    distribution: str = "gaussian"
    trials_per_config: int = 50
    # Sweep grid; None means the canonical 182-row manifest.
    radii_m: tuple | None = None
    sensing_ranges_m: tuple | None = None
    sensor_counts: tuple | None = None
    tx_rule: str | tuple = "2xRs"
    sigma_x: float | None = None
    sigma_y: float | None = None
    # Training.
    hidden_layers: tuple = (20, 20)
    restarts: int = 10
    max_epochs: int = 1000
    max_val_failures: int = 6
    mu_init: float = 1e-3
    mu_inc: float = 10.0
    mu_dec: float = 0.1
    mu_max: float = 1e10
    min_grad: float = 1e-7
    # Explanation.
    boost_rounds: int = 100
    learning_rate: float = 1.0
    pdp_grid: int = 20
    # Benchmark.
    bench_sensor_counts: tuple = (100, 200, 300)
    bench_radius_m: float = 40.0
    bench_sensing_m: float = 15.0
    bench_tx_m: float = 30.0
    bench_trials: int = 3
    bench_forward_reps: int = 1000

    def split_seed(self) -> int:
        return derive_seed(self.master_seed, 101)

    def init_seed(self) -> int:
        return derive_seed(self.master_seed, 202)


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {unknown}")
    for key, value in raw.items():
        if isinstance(value, list):
            raw[key] = tuple(value)
    try:
        return ExperimentConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _resolve_out(config: ExperimentConfig, flag_value: str | None) -> Path:
    out = flag_value or os.environ.get(OUTPUT_DIR_ENV) or config.output_dir
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _version_string() -> str:
    try:
        described = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).parent,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"{__version__}+{described.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _write_manifest(out: Path, command: str, config: ExperimentConfig, extra: dict) -> None:
    payload = {
        "command": command,
        "version": _version_string(),
        "config": asdict(config),
        **extra,
    }
    with open(out / f"{command}_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, default=list)


def _sweep_config(config: ExperimentConfig, distribution: str) -> SweepConfig:
    grid_keys = (config.radii_m, config.sensing_ranges_m, config.sensor_counts)
    if all(k is None for k in grid_keys):
        base = canonical_sweep_config(
            distribution, config.master_seed, config.trials_per_config
        )
        return replace(base, sigma_x=config.sigma_x, sigma_y=config.sigma_y)
    if any(k is None for k in grid_keys):
        raise ConfigError(
            "radii_m, sensing_ranges_m and sensor_counts must be set together"
        )
    return SweepConfig(
        distribution=distribution,
        master_seed=config.master_seed,
        radii_m=tuple(float(r) for r in config.radii_m),
        sensing_ranges_m=tuple(float(r) for r in config.sensing_ranges_m),
        sensor_counts=tuple(int(n) for n in config.sensor_counts),
        tx_rule=config.tx_rule,
        trials_per_config=config.trials_per_config,
        sigma_x=config.sigma_x,
        sigma_y=config.sigma_y,
    )


def cmd_simulate(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out = _resolve_out(config, args.out)
    sweep = _sweep_config(config, config.distribution)
    dataset = run_sweep(sweep, progress=_progress if args.progress else None)
    csv_path = out / f"{config.distribution}.csv"
    dataset.to_csv(csv_path)
    _write_manifest(
        out,
        "simulate",
        config,
        {
            "dataset_csv": csv_path.name,
            "rows": sweep.rows(),
            "seeds": {"master_seed": config.master_seed},
        },
    )
    print(f"wrote {csv_path} ({len(dataset)} rows)")
    return 0


def _progress(done: int, total: int) -> None:
    sys.stderr.write(f"\r{done}/{total} rows")
    if done == total:
        sys.stderr.write("\n")
    sys.stderr.flush()


def cmd_train(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out = _resolve_out(config, args.out)
    dataset = ingest_csv(args.dataset, distribution=config.distribution)
    dataset, split_manifest = split_dataset(dataset, config.split_seed())
    train_cfg = TrainConfig(
        hidden_layers=tuple(config.hidden_layers),
        mu_init=config.mu_init,
        mu_inc=config.mu_inc,
        mu_dec=config.mu_dec,
        mu_max=config.mu_max,
        max_epochs=config.max_epochs,
        max_val_failures=config.max_val_failures,
        min_grad=config.min_grad,
        restarts=config.restarts,
        init_seed=config.init_seed(),
    )
    model, report = train_lm(dataset, train_cfg)

    x, y = dataset.features(), dataset.labels()
    preds = predict(model, x)
    all_metrics = {"overall": metrics(y, preds).to_dict()}
    for tag in ("train", "val", "test"):
        idx = dataset.indices(tag)
        all_metrics[tag] = metrics(y[idx], preds[idx]).to_dict()
    hist = error_histogram(y, preds)

    save_model(model, out / "model.json")
    with open(out / "train_report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    with open(out / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                **all_metrics,
                "error_range": [float(hist.edges[0]), float(hist.edges[-1])],
            },
            fh,
            indent=2,
        )
    with open(out / "split_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(split_manifest, fh, indent=2)
    _write_manifest(
        out,
        "train",
        config,
        {
            "dataset": str(args.dataset),
            "seeds": {"split_seed": config.split_seed(), "init_seed": config.init_seed()},
        },
    )
    print(
        f"wrote {out / 'model.json'} "
        f"(overall R={all_metrics['overall']['r']:.3f}, "
        f"RMSE={all_metrics['overall']['rmse']:.2f})"
    )
    return 0


def cmd_explain(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out = _resolve_out(config, args.out)
    dataset = ingest_csv(args.dataset, distribution=config.distribution)
    model = load_model(args.model)

    x, y = dataset.features(), dataset.labels()
    ensemble = fit_lsboost(x, y, n_rounds=config.boost_rounds, learning_rate=config.learning_rate)
    scores = feature_importance(ensemble)
    with open(out / "importance.csv", "w", encoding="utf-8") as fh:
        fh.write("feature,score\n")
        for name, score in zip(FEATURE_NAMES, scores):
            fh.write(f"{name},{score!r}\n")
    ensemble.to_csv(out / "ensemble.csv")

    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    for fi, fj in pairs:
        surface = pdp_surface(lambda m: predict(model, m), x, (fi, fj), grid_n=config.pdp_grid)
        if surface.degenerate_x or surface.degenerate_y:
            sys.stderr.write(
                f"warning: constant feature in pair "
                f"({FEATURE_NAMES[fi]}, {FEATURE_NAMES[fj]}); axis collapsed\n"
            )
        surface.to_csv(out / f"pdp_{FEATURE_NAMES[fi]}_{FEATURE_NAMES[fj]}.csv")
    _write_manifest(
        out,
        "explain",
        config,
        {"dataset": str(args.dataset), "model": str(args.model)},
    )
    print(f"wrote {out / 'importance.csv'} and {len(pairs)} pdp surfaces")
    return 0


def bench_monte_carlo_cell(
    n_sensors: int,
    radius_m: float,
    sensing_m: float,
    tx_m: float,
    distribution: str,
    seed: int,
) -> float:
    """Wall time of one full simulation trial (deploy, link, count)."""
    spec = DeploymentSpec(
        region=RegionSpec(radius_m=radius_m),
        n_sensors=n_sensors,
        distribution=distribution,
        sensing_range_m=sensing_m,
        tx_range_m=tx_m,
        seed=seed,
    )
    start = time.perf_counter()
    count_barriers(build_coverage_graph(deploy(spec)))
    return time.perf_counter() - start


def run_bench(config: ExperimentConfig, model=None) -> list[tuple[str, int | None, float]]:
    """Mean seconds per Monte Carlo trial at each N, and per surrogate call."""
    rows: list[tuple[str, int | None, float]] = []
    for n in config.bench_sensor_counts:
        times = [
            bench_monte_carlo_cell(
                int(n),
                config.bench_radius_m,
                config.bench_sensing_m,
                config.bench_tx_m,
                config.distribution,
                derive_seed(config.master_seed, 303, int(n), t),
            )
            for t in range(config.bench_trials)
        ]
        rows.append(("monte_carlo", int(n), float(np.mean(times))))

    if model is None:
        model = init_model([4, 20, 20, 1], seed=derive_seed(config.master_seed, 404))
    features = [
        float(np.pi * config.bench_radius_m**2),
        config.bench_sensing_m,
        config.bench_tx_m,
        float(config.bench_sensor_counts[0]),
    ]
    forward(model, features)  # warm
    start = time.perf_counter()
    for _ in range(config.bench_forward_reps):
        forward(model, features)
    per_call = (time.perf_counter() - start) / config.bench_forward_reps
    rows.append(("surrogate", None, per_call))
    return rows


def cmd_bench(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    out = _resolve_out(config, args.out)
    model = load_model(args.model) if args.model else None
    rows = run_bench(config, model)
    with open(out / "bench.csv", "w", encoding="utf-8") as fh:
        fh.write("method,n_sensors,seconds_per_eval\n")
        for method, n, seconds in rows:
            fh.write(f"{method},{'' if n is None else n},{seconds!r}\n")
    _write_manifest(out, "bench", config, {"model": str(args.model) if args.model else None})
    for method, n, seconds in rows:
        label = f"N={n}" if n is not None else "forward pass"
        print(f"{method} {label}: {seconds * 1e3:.3f} ms")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    parts = [p for p in args.features.split(",") if p.strip()]
    if len(parts) != 4:
        raise ConfigError(
            f"--features needs 4 comma-separated values "
            f"(area,sensing_range,transmission_range,sensors), got {len(parts)}"
        )
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"--features values must be numeric: {exc}") from exc
    print(forward(model, values))
    return 0


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    for name in (
        "distribution",
        "trials_per_config",
        "master_seed",
        "restarts",
        "max_epochs",
        "boost_rounds",
    ):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    if getattr(args, "hidden_layers", None) is not None:
        try:
            updates["hidden_layers"] = tuple(
                int(h) for h in args.hidden_layers.split(",") if h.strip()
            )
        except ValueError as exc:
            raise ConfigError(f"--hidden-layers must be comma-separated ints: {exc}") from exc
    config = replace(config, **updates)
    if config.distribution not in DISTRIBUTIONS:
        raise ConfigError(f"unknown distribution {config.distribution!r}")
    return config


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kbarriers",
        description="Barrier coverage simulation and surrogate modeling toolkit",
    )
    parser.add_argument("--version", action="version", version=_version_string())
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output directory (also KBARRIERS_OUTPUT_DIR)")
        p.add_argument("--master-seed", dest="master_seed", type=int)
        p.add_argument("--distribution", choices=DISTRIBUTIONS)

    p = sub.add_parser("simulate", help="run a Monte Carlo sweep and emit the dataset CSV")
    common(p)
    p.add_argument("--trials", dest="trials_per_config", type=int)
    p.add_argument("--progress", action="store_true", help="print row progress to stderr")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", help="train the surrogate on a dataset CSV")
    common(p)
    p.add_argument("--dataset", required=True, help="dataset CSV to ingest")
    p.add_argument("--hidden-layers", dest="hidden_layers", help="e.g. 20,20 or 20")
    p.add_argument("--restarts", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("explain", help="feature importance and PDP surfaces")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--model", required=True, help="model JSON from train")
    p.add_argument("--boost-rounds", dest="boost_rounds", type=int)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="time simulation trials against surrogate calls")
    common(p)
    p.add_argument("--model", help="optional trained model JSON")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("predict", help="predict barriers from a saved model")
    p.add_argument("--model", required=True)
    p.add_argument(
        "--features",
        required=True,
        help="area,sensing_range,transmission_range,sensors",
    )
    p.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KBarriersError as exc:
        sys.stderr.write(f"{exc.code}: {exc}\n")
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"not-found: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
