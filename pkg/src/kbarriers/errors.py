"""Exception types shared across the toolkit.

Every error carries a short machine-parsable ``code`` so the CLI can emit
single-line ``code: message`` diagnostics and map them to exit statuses.
"""


class KBarriersError(Exception):
    code = "error"


class ValidationError(KBarriersError, ValueError):
    code = "validation-error"


class ConfigError(KBarriersError, ValueError):
    code = "config-error"


class SamplingError(KBarriersError, RuntimeError):
    code = "sampling-error"


class DegenerateGeometryError(KBarriersError, ValueError):
    code = "degenerate-geometry"


class BruteForceBudgetError(KBarriersError, RuntimeError):
    code = "brute-force-budget"


class IngestError(KBarriersError, ValueError):
    code = "ingest-error"


class TrainingFailureError(KBarriersError, RuntimeError):
    code = "training-failure"
