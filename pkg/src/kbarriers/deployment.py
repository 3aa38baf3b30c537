"""Sensor deployment over a circular region.

Two placement models: uniform over the disk (polar inverse-CDF sampling) and
an axis-aligned Gaussian centered on the region, truncated to the disk by
rejection. Both are deterministic for a fixed seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SamplingError, ValidationError

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
DISTRIBUTIONS = (GAUSSIAN, UNIFORM)

# Total proposal budget for the truncated-Gaussian rejection loop.
_MAX_REJECTION_DRAWS = 1_000_000


@dataclass(frozen=True)
class RegionSpec:
    """Circular deployment region."""

    radius_m: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (self.radius_m > 0.0):
            raise ValidationError(f"region radius must be positive, got {self.radius_m}")

    def area(self) -> float:
        return float(np.pi * self.radius_m**2)


@dataclass(frozen=True)
class DeploymentSpec:
    """Everything needed to place one sensor field.

    sigma_x/sigma_y default to radius/3 when left unset for the Gaussian
    model; they are ignored by the uniform model.
    """

    region: RegionSpec
    n_sensors: int
    distribution: str
    sensing_range_m: float
    tx_range_m: float
    seed: int
    sigma_x: float | None = None
    sigma_y: float | None = None

    def __post_init__(self):
        if self.n_sensors < 1:
            raise ValidationError(f"n_sensors must be >= 1, got {self.n_sensors}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValidationError(f"unknown distribution {self.distribution!r}")
        if not (self.sensing_range_m > 0.0):
            raise ValidationError("sensing_range_m must be positive")
        if self.tx_range_m < 2.0 * self.sensing_range_m:
            raise ValidationError(
                f"tx_range_m must be at least 2*sensing_range_m "
                f"({self.tx_range_m} < {2.0 * self.sensing_range_m})"
            )
        for name in ("sigma_x", "sigma_y"):
            value = getattr(self, name)
            if value is not None and not (value > 0.0):
                raise ValidationError(f"{name} must be positive when set")

    def sigmas(self) -> tuple[float, float]:
        default = self.region.radius_m / 3.0
        sx = default if self.sigma_x is None else self.sigma_x
        sy = default if self.sigma_y is None else self.sigma_y
        return sx, sy


@dataclass(frozen=True)
class SensorField:
    """Placed sensors plus the ranges they operate with."""

    positions: np.ndarray  # (n, 2) float64, read-only
    sensing_range_m: float
    tx_range_m: float
    region: RegionSpec
    distribution: str = UNIFORM
    seed: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 2:
            raise ValidationError(f"positions must be (n, 2), got {pos.shape}")
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        if self.tx_range_m < 2.0 * self.sensing_range_m:
            raise ValidationError("tx_range_m must be at least 2*sensing_range_m")
        center = np.asarray(self.region.center)
        radii = np.hypot(*(pos - center).T)
        # 1e-9 slack absorbs roundoff from the polar transform at the rim.
        if radii.size and float(radii.max()) > self.region.radius_m + 1e-9:
            raise ValidationError(
                f"sensor at radius {radii.max():.6f} outside region of radius {self.region.radius_m}"
            )

    @property
    def n_sensors(self) -> int:
        return int(self.positions.shape[0])

    def to_csv(self, path) -> None:
        """Write positions as x,y rows with 6-decimal precision."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("x,y\n")
            for x, y in self.positions:
                fh.write(f"{x:.6f},{y:.6f}\n")


def sample_uniform(spec: DeploymentSpec) -> SensorField:
    """Place sensors uniformly over the disk.

    Radius is drawn as R*sqrt(u) so density is uniform in area rather than
    piling up at the center.
    """
    rng = np.random.default_rng(spec.seed)
    u = rng.random(spec.n_sensors)
    v = rng.random(spec.n_sensors)
    gamma = spec.region.radius_m * np.sqrt(u)
    phi = 2.0 * np.pi * v
    xy = np.column_stack((gamma * np.cos(phi), gamma * np.sin(phi)))
    xy += np.asarray(spec.region.center)
    return SensorField(
        positions=xy,
        sensing_range_m=spec.sensing_range_m,
        tx_range_m=spec.tx_range_m,
        region=spec.region,
        distribution=UNIFORM,
        seed=spec.seed,
    )


def sample_gaussian(spec: DeploymentSpec) -> SensorField:
    """Place sensors from a disk-truncated axis-aligned Gaussian.

    Plain rejection: draw from the untruncated Gaussian, keep points inside
    the region. Aborts with the observed acceptance rate if the total budget
    of proposals is exhausted (pathologically wide sigmas).
    """
    rng = np.random.default_rng(spec.seed)
    sx, sy = spec.sigmas()
    cx, cy = spec.region.center
    r2 = spec.region.radius_m**2

    kept: list[np.ndarray] = []
    accepted = 0
    drawn = 0
    while accepted < spec.n_sensors:
        batch = min(max(2 * (spec.n_sensors - accepted), 128), _MAX_REJECTION_DRAWS - drawn)
        if batch <= 0:
            rate = accepted / drawn if drawn else 0.0
            raise SamplingError(
                f"rejection sampling exhausted {_MAX_REJECTION_DRAWS} draws "
                f"(acceptance rate {rate:.4f}); sigmas too wide for the region"
            )
        x = cx + sx * rng.standard_normal(batch)
        y = cy + sy * rng.standard_normal(batch)
        drawn += batch
        inside = (x - cx) ** 2 + (y - cy) ** 2 <= r2
        if inside.any():
            kept.append(np.column_stack((x[inside], y[inside])))
            accepted += int(inside.sum())

    xy = np.concatenate(kept)[: spec.n_sensors]
    return SensorField(
        positions=xy,
        sensing_range_m=spec.sensing_range_m,
        tx_range_m=spec.tx_range_m,
        region=spec.region,
        distribution=GAUSSIAN,
        seed=spec.seed,
    )


def deploy(spec: DeploymentSpec) -> SensorField:
    """Dispatch to the sampler named by spec.distribution."""
    if spec.distribution == UNIFORM:
        return sample_uniform(spec)
    return sample_gaussian(spec)
