"""k-barrier coverage simulation and surrogate modeling for circular sensor fields."""

__version__ = "0.1.0"

from .analysis import (
    Histogram,
    MetricsReport,
    PdpSurface,
    error_histogram,
    metrics,
    pdp_mean_slopes,
    pdp_surface,
)
from .coverage import (
    BarrierCount,
    CoverageGraph,
    brute_force_barriers,
    build_coverage_graph,
    count_barriers,
    cycle_winding,
    is_covered,
    max_barrier_paths,
)
from .dataset import (
    CSV_HEADER,
    FEATURE_NAMES,
    Dataset,
    Sample,
    SweepConfig,
    canonical_manifest,
    canonical_sweep_config,
    ingest_csv,
    run_sweep,
    simulate_row,
    split_dataset,
    split_sizes,
)
from .deployment import (
    DISTRIBUTIONS,
    GAUSSIAN,
    UNIFORM,
    DeploymentSpec,
    RegionSpec,
    SensorField,
    deploy,
    sample_gaussian,
    sample_uniform,
)
from .ensemble import (
    Stump,
    StumpEnsemble,
    feature_importance,
    fit_lsboost,
    node_risk,
)
from .errors import (
    BruteForceBudgetError,
    ConfigError,
    DegenerateGeometryError,
    IngestError,
    KBarriersError,
    SamplingError,
    TrainingFailureError,
    ValidationError,
)
from .mlp import (
    AffineMap,
    MlpModel,
    TrainConfig,
    TrainReport,
    forward,
    init_model,
    jacobian_norm,
    load_model,
    model_from_dict,
    model_to_dict,
    predict,
    save_model,
    train_lm,
)
from .seeds import derive_seed

__all__ = [
    "__version__",
    "AffineMap",
    "BarrierCount",
    "BruteForceBudgetError",
    "ConfigError",
    "CoverageGraph",
    "CSV_HEADER",
    "Dataset",
    "DegenerateGeometryError",
    "DeploymentSpec",
    "DISTRIBUTIONS",
    "FEATURE_NAMES",
    "GAUSSIAN",
    "Histogram",
    "IngestError",
    "KBarriersError",
    "MetricsReport",
    "MlpModel",
    "PdpSurface",
    "RegionSpec",
    "Sample",
    "SamplingError",
    "SensorField",
    "Stump",
    "StumpEnsemble",
    "SweepConfig",
    "TrainConfig",
    "TrainingFailureError",
    "TrainReport",
    "UNIFORM",
    "ValidationError",
    "brute_force_barriers",
    "build_coverage_graph",
    "canonical_manifest",
    "canonical_sweep_config",
    "count_barriers",
    "cycle_winding",
    "deploy",
    "derive_seed",
    "error_histogram",
    "feature_importance",
    "fit_lsboost",
    "forward",
    "ingest_csv",
    "init_model",
    "is_covered",
    "jacobian_norm",
    "load_model",
    "max_barrier_paths",
    "metrics",
    "model_from_dict",
    "model_to_dict",
    "node_risk",
    "pdp_mean_slopes",
    "pdp_surface",
    "predict",
    "run_sweep",
    "sample_gaussian",
    "sample_uniform",
    "save_model",
    "simulate_row",
    "split_dataset",
    "split_sizes",
    "train_lm",
]
