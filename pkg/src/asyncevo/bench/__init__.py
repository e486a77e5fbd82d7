from .experiment import (
    DOMAIN_DEFAULTS,
    ExperimentSpec,
    GridPoint,
    RunRecord,
    StopRule,
    load_records_csv,
    run_experiment,
)
from .histograms import TraceParseError, export_histograms, load_column, parse_trace
from .stats import ComparisonError, ComparisonResult, compare_runs, ks_distance_to_uniform, mann_whitney
