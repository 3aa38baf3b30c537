"""Monte Carlo sweep datasets: generation, CSV round-trip, splits.

A dataset row is one sweep configuration (area, sensing range, transmission
range, sensor count) labeled with the mean barrier count over that
configuration's trials. The canonical table has 182 rows per distribution:
a full 120-row grid with tx = 2*Rs plus a 62-row extension block where tx
varies independently above the 2*Rs floor, so the two range columns are not
perfectly collinear.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

import numpy as np

from .coverage import build_coverage_graph, count_barriers
from .deployment import DISTRIBUTIONS, DeploymentSpec, RegionSpec, deploy
from .errors import IngestError, ValidationError
from .seeds import derive_seed

FEATURE_NAMES = ("area", "sensing_range", "transmission_range", "sensors")
CSV_HEADER = "area,sensing_range,transmission_range,sensors,barriers"
SPLIT_TAGS = ("train", "val", "test")

TX_RULE_DOUBLE = "2xRs"

# Grid the canonical manifest is built from.
_RADII = (40.0, 60.0, 80.0, 100.0, 127.0)
_SENSING = (15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
_COUNTS = (100, 200, 300, 400)


@dataclass(frozen=True)
class Sample:
    """One labeled sweep row."""

    area_m2: float
    sensing_range_m: float
    tx_range_m: float
    n_sensors: int
    barriers: float

    def features(self) -> tuple[float, float, float, float]:
        return (self.area_m2, self.sensing_range_m, self.tx_range_m, float(self.n_sensors))


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    distribution: str | None = None
    provenance: str = "simulated"
    split: tuple[str, ...] | None = None  # per-row tag, aligned with samples

    def __post_init__(self):
        if self.split is not None and len(self.split) != len(self.samples):
            raise ValidationError("split tags must align with samples")

    def __len__(self) -> int:
        return len(self.samples)

    def features(self) -> np.ndarray:
        return np.array([s.features() for s in self.samples], dtype=np.float64)

    def labels(self) -> np.ndarray:
        return np.array([s.barriers for s in self.samples], dtype=np.float64)

    def indices(self, tag: str) -> np.ndarray:
        if self.split is None:
            raise ValidationError("dataset has no split assignment")
        if tag not in SPLIT_TAGS:
            raise ValidationError(f"unknown split tag {tag!r}")
        return np.array([i for i, t in enumerate(self.split) if t == tag], dtype=int)

    def to_csv(self, path) -> None:
        """Emit the table; floats use shortest round-trip formatting."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for s in self.samples:
                fh.write(
                    f"{s.area_m2!r},{s.sensing_range_m!r},{s.tx_range_m!r},"
                    f"{s.n_sensors},{s.barriers!r}\n"
                )


@dataclass(frozen=True)
class SweepConfig:
    """Grid or explicit-row sweep definition.

    tx_rule is either the string "2xRs" or a tuple of explicit transmission
    ranges crossed with the grid. explicit_rows bypasses the grid entirely
    with (radius_m, sensing_m, tx_m, n_sensors) tuples.
    """

    distribution: str
    master_seed: int
    radii_m: tuple[float, ...] = _RADII
    sensing_ranges_m: tuple[float, ...] = _SENSING
    sensor_counts: tuple[int, ...] = _COUNTS
    tx_rule: str | tuple[float, ...] = TX_RULE_DOUBLE
    trials_per_config: int = 50
    sigma_x: float | None = None
    sigma_y: float | None = None
    explicit_rows: tuple[tuple[float, float, float, int], ...] | None = None

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.distribution!r}")
        if self.trials_per_config < 1:
            raise ValidationError("trials_per_config must be >= 1")
        if self.explicit_rows is None:
            if not (self.radii_m and self.sensing_ranges_m and self.sensor_counts):
                raise ValidationError("sweep grid must be non-empty")
            if self.tx_rule != TX_RULE_DOUBLE and not isinstance(self.tx_rule, tuple):
                raise ValidationError(f"tx_rule must be {TX_RULE_DOUBLE!r} or a tuple")
        bad = [
            f"row {idx}: tx {tx} < 2*Rs {2 * rs}"
            for idx, (_, rs, tx, _) in enumerate(self.rows())
            if tx < 2 * rs
        ]
        if bad:
            raise ValidationError("infeasible configuration: " + "; ".join(bad))

    def rows(self) -> list[tuple[float, float, float, int]]:
        if self.explicit_rows is not None:
            return [tuple(r) for r in self.explicit_rows]
        out = []
        for radius in self.radii_m:
            for rs in self.sensing_ranges_m:
                txs = (2.0 * rs,) if self.tx_rule == TX_RULE_DOUBLE else self.tx_rule
                for tx in txs:
                    for n in self.sensor_counts:
                        out.append((radius, rs, tx, int(n)))
        return out


def canonical_manifest() -> tuple[tuple[float, float, float, int], ...]:
    """The 182 canonical sweep rows.

    Block A: radii x sensing ranges x sensor counts with tx = 2*Rs (120 rows).
    Block B: tx swept independently above the 2*Rs floor, capped at 80 m, for
    a subset of configurations (62 rows). Block B breaks the exact tx = 2*Rs
    collinearity so models fitted to the table can attribute effects to the
    sensing range rather than an arbitrary mix of the two range columns.
    """
    rows = [
        (radius, rs, 2.0 * rs, n)
        for radius in _RADII
        for rs in _SENSING
        for n in _COUNTS
    ]
    extension = {
        15.0: (33.0, 36.0, 39.0, 42.0, 45.0),
        25.0: (55.0, 60.0, 65.0, 70.0, 75.0),
    }
    for radius in (40.0, 80.0, 127.0):
        for rs, txs in extension.items():
            for tx in txs:
                for n in (200, 400):
                    rows.append((radius, rs, tx, n))
    for n in (200, 400):
        rows.append((40.0, 35.0, 77.0, n))
    return tuple(rows)


def canonical_sweep_config(
    distribution: str, master_seed: int, trials_per_config: int = 50
) -> SweepConfig:
    return SweepConfig(
        distribution=distribution,
        master_seed=master_seed,
        trials_per_config=trials_per_config,
        explicit_rows=canonical_manifest(),
    )


def simulate_row(
    radius_m: float,
    sensing_m: float,
    tx_m: float,
    n_sensors: int,
    distribution: str,
    seed: int,
    sigma_x: float | None = None,
    sigma_y: float | None = None,
) -> int:
    """One deployment trial: place, link, count."""
    spec = DeploymentSpec(
        region=RegionSpec(radius_m=radius_m),
        n_sensors=n_sensors,
        distribution=distribution,
        sensing_range_m=sensing_m,
        tx_range_m=tx_m,
        seed=seed,
        sigma_x=sigma_x,
        sigma_y=sigma_y,
    )
    graph = build_coverage_graph(deploy(spec))
    return count_barriers(graph).k


def run_sweep(config: SweepConfig, progress=None) -> Dataset:
    """Monte Carlo sweep: mean barrier count per row over seeded trials.

    Trial seeds mix (master_seed, row index, trial index), so any cell can
    be reproduced independently; results reduce in row order regardless of
    how trials are executed.
    """
    samples = []
    rows = config.rows()
    for row_idx, (radius, rs, tx, n) in enumerate(rows):
        counts = [
            simulate_row(
                radius,
                rs,
                tx,
                n,
                config.distribution,
                derive_seed(config.master_seed, row_idx, trial),
                config.sigma_x,
                config.sigma_y,
            )
            for trial in range(config.trials_per_config)
        ]
        samples.append(
            Sample(
                area_m2=float(np.pi * radius**2),
                sensing_range_m=rs,
                tx_range_m=tx,
                n_sensors=n,
                barriers=float(np.mean(counts)),
            )
        )
        if progress is not None:
            progress(row_idx + 1, len(rows))
    return Dataset(samples=tuple(samples), distribution=config.distribution)


_HEADER_ALIASES = {
    "area": "area",
    "aream2": "area",
    "sensingrange": "sensing_range",
    "sensingrangem": "sensing_range",
    "rs": "sensing_range",
    "transmissionrange": "transmission_range",
    "transmissionrangem": "transmission_range",
    "txrange": "transmission_range",
    "tx": "transmission_range",
    "rtx": "transmission_range",
    "sensors": "sensors",
    "nsensors": "sensors",
    "numberofsensors": "sensors",
    "nodes": "sensors",
    "barriers": "barriers",
    "numberofbarriers": "barriers",
    "barriercount": "barriers",
    "k": "barriers",
}


def _normalize_header(cell: str) -> str:
    return "".join(ch for ch in cell.lower() if ch.isalnum())


def ingest_csv(path, distribution: str | None = None) -> Dataset:
    """Read a 5-column table; header names are matched through known aliases
    and a headerless all-numeric file falls back to canonical column order."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise IngestError(f"{path}: empty file")

    first = [c.strip() for c in lines[0].split(",")]
    canonical = ["area", "sensing_range", "transmission_range", "sensors", "barriers"]

    def _numeric(cells):
        try:
            [float(c) for c in cells]
            return True
        except ValueError:
            return False

    if _numeric(first):
        order = list(range(5))
        data_lines = lines
        start_row = 1
    else:
        mapped = [_HEADER_ALIASES.get(_normalize_header(c)) for c in first]
        missing = [canonical[i] for i in range(5) if canonical[i] not in mapped]
        if len(first) != 5 or missing:
            raise IngestError(
                f"{path}: unrecognized header {first!r}; cannot map columns {missing}"
            )
        order = [mapped.index(name) for name in canonical]
        data_lines = lines[1:]
        start_row = 2

    samples = []
    bad_rows = []
    for offset, line in enumerate(data_lines):
        row_no = start_row + offset
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != 5 or not _numeric(cells):
            bad_rows.append(f"row {row_no}: {line!r}")
            continue
        area, rs, tx, n, k = (float(cells[i]) for i in order)
        if area <= 0 or rs <= 0 or tx < 2 * rs or n < 1 or k < 0 or n != int(n):
            bad_rows.append(f"row {row_no}: out-of-range values {line!r}")
            continue
        samples.append(
            Sample(
                area_m2=area,
                sensing_range_m=rs,
                tx_range_m=tx,
                n_sensors=int(n),
                barriers=k,
            )
        )
    if bad_rows:
        raise IngestError(f"{path}: malformed rows: " + "; ".join(bad_rows))
    if not samples:
        raise IngestError(f"{path}: no data rows")
    return Dataset(samples=tuple(samples), distribution=distribution, provenance="ingested")


def split_sizes(n: int) -> tuple[int, int, int]:
    """55:15:30 row budget: rounded val/test targets, remainder to train."""
    n_val = int(round(0.15 * n))
    n_test = int(round(0.30 * n))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ValidationError(f"dataset too small to split: {n} rows")
    return n_train, n_val, n_test


def split_dataset(dataset: Dataset, seed: int) -> tuple[Dataset, dict]:
    """Assign rows to train/val/test by a seeded Mersenne Twister shuffle."""
    n = len(dataset)
    n_train, n_val, n_test = split_sizes(n)
    order = list(range(n))
    random.Random(seed).shuffle(order)
    tags = [""] * n
    for pos, idx in enumerate(order):
        if pos < n_train:
            tags[idx] = "train"
        elif pos < n_train + n_val:
            tags[idx] = "val"
        else:
            tags[idx] = "test"
    manifest = {
        "seed": seed,
        "counts": {"train": n_train, "val": n_val, "test": n_test},
        "assignment": tags,
    }
    return replace(dataset, split=tuple(tags)), manifest
