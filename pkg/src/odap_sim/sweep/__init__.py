from .factorial import (
    FACTOR_COLUMNS,
    INTERCEPT,
    FactorModel,
    build_terms,
    fit_factorial_regression,
    fit_from_summary,
    model_matrix,
    select_significant,
)
from .metrics import BatchMetrics, MetricsCollector
from .plan import (
    DEFAULT_PATTERN_CAP,
    DEFAULT_REPLICATES,
    DEFAULT_THROUGHPUTS,
    SweepPlan,
    enumerate_patterns,
)
from .runner import (
    SWEEP_COLUMNS,
    SweepRecord,
    SweepResult,
    read_sweep_csv,
    run_sweep,
    run_sweep_async,
)
from .stats import pooled_variance, summarize, summarize_values


__all__ = [
    "DEFAULT_PATTERN_CAP",
    "DEFAULT_REPLICATES",
    "DEFAULT_THROUGHPUTS",
    "FACTOR_COLUMNS",
    "INTERCEPT",
    "SWEEP_COLUMNS",
    "BatchMetrics",
    "FactorModel",
    "MetricsCollector",
    "SweepPlan",
    "SweepRecord",
    "SweepResult",
    "build_terms",
    "enumerate_patterns",
    "fit_factorial_regression",
    "fit_from_summary",
    "model_matrix",
    "pooled_variance",
    "read_sweep_csv",
    "run_sweep",
    "run_sweep_async",
    "select_significant",
    "summarize",
    "summarize_values",
]
